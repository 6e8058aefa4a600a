"""Scalar diffraction: unitary FFT, band-limited angular spectrum and Fresnel kernels.

Frequency grids are kept in FFT order (zero frequency at index ``(0, 0)``).
Spatial kernels returned to callers (``fresnel_psf``, ``lens_focal_phase``)
are centred, with the origin at index ``(n // 2, n // 2)``.

Every propagation zero-pads the SLM window to the imaging grid of
``OpticalConfig.padded_shape``, applies the transfer function and crops back.
Leading batch axes are allowed everywhere; the last two axes are ``(y, x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .field import OpticalConfig

__all__ = [
    "Model",
    "PropagationModel",
    "fft2",
    "pad",
    "crop",
    "asm_transfer",
    "fresnel_psf",
    "transfer_function",
    "propagate",
    "propagate_adjoint",
    "lens_focal_phase",
    "band_limit",
]


class Model(str, Enum):
    ASM = "ASM"
    FRESNEL = "Fresnel"


@dataclass(frozen=True)
class PropagationModel:
    """A propagation model and signed distance ``z`` (negative propagates backward)."""

    model: Model
    z: float

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        if not math.isfinite(self.z):
            raise ValueError(f"propagation distance must be finite, got {self.z}")
        object.__setattr__(self, "z", float(self.z))

    def reversed(self) -> "PropagationModel":
        return PropagationModel(self.model, -self.z)


def fft2(field, direction: str = "forward") -> np.ndarray:
    """Unitary 2D DFT over the last two axes (``1/sqrt(MN)`` in both directions)."""
    arr = np.asarray(field)
    if arr.ndim < 2 or arr.shape[-1] < 2 or arr.shape[-2] < 2:
        raise ValueError(f"fft2 needs at least a 2x2 grid, got shape {arr.shape}")
    if direction == "forward":
        return np.fft.fft2(arr, norm="ortho")
    if direction == "inverse":
        return np.fft.ifft2(arr, norm="ortho")
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def _pad_widths(small: int, big: int) -> tuple[int, int]:
    before = (big - small) // 2
    return before, big - small - before


def pad(field, shape: tuple[int, int]) -> np.ndarray:
    """Zero-pad the last two axes symmetrically up to ``shape``."""
    arr = np.asarray(field)
    ny, nx = arr.shape[-2:]
    if (ny, nx) == tuple(shape):
        return arr
    widths = [(0, 0)] * (arr.ndim - 2) + [_pad_widths(ny, shape[0]), _pad_widths(nx, shape[1])]
    return np.pad(arr, widths)


def crop(field, shape: tuple[int, int]) -> np.ndarray:
    """Centre-crop the last two axes to ``shape``; inverse of :func:`pad`."""
    arr = np.asarray(field)
    ny, nx = arr.shape[-2:]
    if (ny, nx) == tuple(shape):
        return arr
    y0, _ = _pad_widths(shape[0], ny)
    x0, _ = _pad_widths(shape[1], nx)
    return arr[..., y0 : y0 + shape[0], x0 : x0 + shape[1]]


def _frequencies(config: OpticalConfig) -> tuple[np.ndarray, np.ndarray]:
    ny, nx = config.padded_shape
    fy = np.fft.fftfreq(ny, d=config.pixel_pitch_mm)
    fx = np.fft.fftfreq(nx, d=config.pixel_pitch_mm)
    return fy[:, None], fx[None, :]


def band_limit(config: OpticalConfig, z: float) -> tuple[float, float]:
    """Local-frequency limits ``(f_y, f_x)`` beyond which ASM sampling aliases.

    ``f_limit = 1 / (lambda * sqrt((2 z / (N dx))**2 + 1))`` with ``N`` the padded
    sample count along the axis.
    """
    lam = config.wavelength_mm
    ny, nx = config.padded_shape
    dx = config.pixel_pitch_mm
    fly = 1.0 / (lam * math.sqrt((2.0 * z / (ny * dx)) ** 2 + 1.0))
    flx = 1.0 / (lam * math.sqrt((2.0 * z / (nx * dx)) ** 2 + 1.0))
    return fly, flx


@lru_cache(maxsize=64)
def asm_transfer(config: OpticalConfig, z: float) -> np.ndarray:
    """Band-limited angular spectrum transfer function on the padded frequency grid.

    ``H = exp(i 2 pi z sqrt(1/lambda^2 - fx^2 - fy^2))`` inside the band limit,
    0 for evanescent or band-limited frequencies. The result is cached and
    read-only.
    """
    z = float(z)
    if not math.isfinite(z):
        raise ValueError(f"propagation distance must be finite, got {z}")
    fy, fx = _frequencies(config)
    arg = 1.0 / config.wavelength_mm**2 - fx**2 - fy**2
    fly, flx = band_limit(config, z)
    passband = (arg > 0) & (np.abs(fx) <= flx) & (np.abs(fy) <= fly)
    kz = np.sqrt(np.where(passband, arg, 0.0))
    transfer = np.where(passband, np.exp(2j * np.pi * z * kz), 0.0)
    transfer.flags.writeable = False
    return transfer


def _centred_coords(n: int, dx: float) -> np.ndarray:
    return (np.arange(n) - n // 2) * dx


def fresnel_psf(config: OpticalConfig, z: float) -> np.ndarray:
    """Fresnel impulse response ``-(i/(lambda z)) exp(i pi (x^2+y^2) / (lambda z))``.

    Sampled on the padded spatial grid with the origin at index ``(N // 2)``.
    """
    if z == 0:
        raise ValueError("Fresnel kernel undefined at z=0; use ASM")
    lam = config.wavelength_mm
    ny, nx = config.padded_shape
    y = _centred_coords(ny, config.pixel_pitch_mm)[:, None]
    x = _centred_coords(nx, config.pixel_pitch_mm)[None, :]
    return -(1j / (lam * z)) * np.exp((1j * np.pi / (lam * z)) * (x**2 + y**2))


@lru_cache(maxsize=64)
def _fresnel_transfer(config: OpticalConfig, z: float) -> np.ndarray:
    psf = np.fft.ifftshift(fresnel_psf(config, z))
    # dx^2 turns the sampled kernel into a quadrature of the convolution integral
    transfer = np.fft.fft2(psf) * config.pixel_pitch_mm**2
    transfer.flags.writeable = False
    return transfer


def transfer_function(config: OpticalConfig, model: PropagationModel) -> np.ndarray:
    if model.model is Model.ASM:
        return asm_transfer(config, model.z)
    if model.z == 0:
        raise ValueError("Fresnel kernel undefined at z=0; use ASM")
    return _fresnel_transfer(config, model.z)


def _check_grid(field: np.ndarray, config: OpticalConfig) -> None:
    if field.ndim < 2 or field.shape[-2:] != config.shape:
        raise ValueError(
            f"field grid {field.shape[-2:]} does not match the SLM grid {config.shape}"
        )


def _apply(field, config: OpticalConfig, transfer: np.ndarray) -> np.ndarray:
    arr = np.asarray(field, dtype=np.complex128)
    _check_grid(arr, config)
    spectrum = np.fft.fft2(pad(arr, config.padded_shape), norm="ortho")
    return crop(np.fft.ifft2(spectrum * transfer, norm="ortho"), config.shape)


def propagate(field, config: OpticalConfig, model: PropagationModel) -> np.ndarray:
    """Propagate ``field`` (SLM grid, optional leading batch axes) by ``model.z``."""
    return _apply(field, config, transfer_function(config, model))


def propagate_adjoint(field, config: OpticalConfig, model: PropagationModel) -> np.ndarray:
    """Hermitian adjoint of :func:`propagate` (``crop . F^H . conj(T) . F . pad``).

    For ASM this coincides with propagation by ``-z``.
    """
    return _apply(field, config, np.conj(transfer_function(config, model)))


def lens_focal_phase(config: OpticalConfig, f: float) -> np.ndarray:
    """Thin-lens quadratic phase ``exp(-i pi (x^2+y^2) / (lambda f))`` on the SLM grid."""
    if f == 0:
        raise ValueError("focal length must be non-zero")
    y = _centred_coords(config.ny, config.pixel_pitch_mm)[:, None]
    x = _centred_coords(config.nx, config.pixel_pitch_mm)[None, :]
    return np.exp((-1j * np.pi / (config.wavelength_mm * f)) * (x**2 + y**2))
