"""Optical configuration, complex field grids, volumetric targets and holograms.

All lengths are millimetres. Grids follow the numpy ``shape = (ny, nx)``
convention: rows are ``y``, columns are ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "HologramKind",
    "OpticalConfig",
    "LayerStack",
    "Hologram",
    "wavenumber",
    "complex_field",
    "normalize_intensity",
]

POH_TOLERANCE = 1e-12


class HologramKind(str, Enum):
    POH = "POH"
    CH = "CH"


@dataclass(frozen=True)
class OpticalConfig:
    """The simulated SLM: wavelength, pixel pitch and window size.

    ``pad_factor`` sets the imaging grid, ``pad_factor * (ny, nx)``, used by the
    propagators to suppress circular wrap-around.
    """

    wavelength_mm: float
    pixel_pitch_mm: float
    nx: int
    ny: int
    pad_factor: int = 2

    def __post_init__(self):
        if not (math.isfinite(self.wavelength_mm) and self.wavelength_mm > 0):
            raise ValueError(f"wavelength_mm must be > 0, got {self.wavelength_mm}")
        if not (math.isfinite(self.pixel_pitch_mm) and self.pixel_pitch_mm > 0):
            raise ValueError(f"pixel_pitch_mm must be > 0, got {self.pixel_pitch_mm}")
        if int(self.nx) != self.nx or int(self.ny) != self.ny or self.nx < 2 or self.ny < 2:
            raise ValueError(f"grid must be at least 2x2 integers, got {self.nx}x{self.ny}")
        if self.pad_factor not in (1, 2):
            raise ValueError(f"pad_factor must be 1 or 2, got {self.pad_factor}")

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength_mm

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def padded_shape(self) -> tuple[int, int]:
        return (self.pad_factor * self.ny, self.pad_factor * self.nx)

    def replace(self, **changes) -> "OpticalConfig":
        values = dict(
            wavelength_mm=self.wavelength_mm,
            pixel_pitch_mm=self.pixel_pitch_mm,
            nx=self.nx,
            ny=self.ny,
            pad_factor=self.pad_factor,
        )
        values.update(changes)
        return OpticalConfig(**values)


def wavenumber(config: OpticalConfig) -> float:
    """Return ``2*pi / wavelength`` in 1/mm."""
    return config.wavenumber


def complex_field(data, *, copy: bool = True) -> np.ndarray:
    """Validate ``data`` as a complex field and return it as read-only complex128.

    A field is a finite 2D grid of at least 2x2 samples.
    """
    arr = np.array(data, dtype=np.complex128, copy=copy)
    if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 2:
        raise ValueError(f"complex field must be a 2D grid of at least 2x2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("complex field contains NaN or Inf samples")
    arr.flags.writeable = False
    return arr


def normalize_intensity(image) -> np.ndarray:
    """Affinely map ``[min, max]`` of ``image`` onto ``[0, 1]``.

    A constant image maps to all zeros.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.size == 0:
        raise ValueError("cannot normalize an empty image")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains NaN or Inf samples")
    lo = img.min()
    hi = img.max()
    if hi == lo:
        return np.zeros_like(img)
    return (img - lo) / (hi - lo)


@dataclass(frozen=True, eq=False)
class LayerStack:
    """``J`` intensity planes in ``[0, 1]`` at strictly increasing depths.

    Attributes
    ----------
    intensities : ndarray, shape (J, ny, nx)
    depths : tuple of float
        Plane distances from the hologram, in mm.
    """

    intensities: np.ndarray
    depths: tuple[float, ...]

    def __post_init__(self):
        stack = np.array(self.intensities, dtype=np.float64)
        if stack.ndim == 2:
            stack = stack[None]
        if stack.ndim != 3 or stack.shape[0] < 1:
            raise ValueError(f"intensities must have shape (J, ny, nx), got {stack.shape}")
        depths = tuple(float(z) for z in np.atleast_1d(self.depths))
        if len(depths) != stack.shape[0]:
            raise ValueError(f"{stack.shape[0]} planes but {len(depths)} depths")
        if not all(math.isfinite(z) for z in depths):
            raise ValueError("depths must be finite")
        if any(b <= a for a, b in zip(depths, depths[1:])):
            raise ValueError(f"depths must be strictly increasing, got {depths}")
        if not np.all(np.isfinite(stack)) or stack.min() < 0.0 or stack.max() > 1.0:
            raise ValueError("every intensity sample must lie in [0, 1]")
        stack.flags.writeable = False
        object.__setattr__(self, "intensities", stack)
        object.__setattr__(self, "depths", depths)

    @classmethod
    def from_planes(cls, planes: Iterable[tuple[np.ndarray, float]]) -> "LayerStack":
        planes = list(planes)
        if not planes:
            raise ValueError("a layer stack needs at least one plane")
        images, depths = zip(*planes)
        shapes = {np.shape(img) for img in images}
        if len(shapes) != 1:
            raise ValueError(f"all planes must share one shape, got {sorted(shapes)}")
        return cls(np.stack([np.asarray(img, dtype=np.float64) for img in images]), tuple(depths))

    @property
    def num_planes(self) -> int:
        return self.intensities.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.intensities.shape[1:]

    @property
    def amplitudes(self) -> np.ndarray:
        return np.sqrt(self.intensities)

    def check_grid(self, config: OpticalConfig) -> None:
        if self.shape != config.shape:
            raise ValueError(
                f"target planes are {self.shape[1]}x{self.shape[0]} but the SLM grid is "
                f"{config.nx}x{config.ny}"
            )

    def planes(self) -> Sequence[tuple[np.ndarray, float]]:
        return list(zip(self.intensities, self.depths))


@dataclass(frozen=True, eq=False)
class Hologram:
    """A complex field tagged phase-only (POH) or complex (CH)."""

    kind: HologramKind
    field: np.ndarray

    def __post_init__(self):
        kind = HologramKind(self.kind)
        data = complex_field(self.field)
        if kind is HologramKind.POH:
            err = np.max(np.abs(np.abs(data) - 1.0))
            if err > POH_TOLERANCE:
                raise ValueError(f"phase-only hologram has non-unit modulus (max deviation {err:.3e})")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "field", data)

    @classmethod
    def phase_only(cls, source) -> "Hologram":
        """Build a POH from a real phase grid or from the phase of a complex field.

        Zero-amplitude samples of a complex source get phase 0.
        """
        src = np.asarray(source)
        if np.iscomplexobj(src):
            phase = np.angle(src)
        else:
            phase = src.astype(np.float64)
        return cls(HologramKind.POH, np.exp(1j * phase))

    @classmethod
    def complex(cls, source) -> "Hologram":
        return cls(HologramKind.CH, source)

    @property
    def shape(self) -> tuple[int, int]:
        return self.field.shape

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.field)

    @property
    def amplitude(self) -> np.ndarray:
        return np.abs(self.field)
