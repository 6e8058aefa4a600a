"""Fourier-transform holography: recording, reconstruction and geometry checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field import complex_field
from .propagation import fft2

__all__ = [
    "FTHSetup",
    "FOVReport",
    "transmission",
    "fth_record",
    "fth_reconstruct",
    "extract_sideband",
    "fov_check",
]


@dataclass(frozen=True)
class FTHSetup:
    """Recording geometry.

    Attributes
    ----------
    object_diameter : float
        Object extent ``D`` in mm.
    reference_separation : float
        Object to reference distance ``L`` in mm.
    detector_pixel : float
        Detector pixel size ``Delta_X`` in mm.
    object_pixel : float
        Object-plane pixel size ``Delta_x`` in mm.
    distance : float
        Object to detector distance ``Z`` in mm.
    samples : int
        Samples ``N`` per axis.
    """

    object_diameter: float
    reference_separation: float
    detector_pixel: float
    object_pixel: float
    distance: float
    samples: int

    def __post_init__(self):
        for name in ("object_diameter", "reference_separation", "detector_pixel",
                     "object_pixel", "distance"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be > 0, got {value}")
        if self.samples < 2:
            raise ValueError(f"samples must be >= 2, got {self.samples}")


@dataclass(frozen=True)
class FOVReport:
    fov_s0: float
    sampling_ok: bool
    separation_ok: bool
    sampling_residual: float


def transmission(absorption, phase) -> np.ndarray:
    """Sample transmission ``exp(-a + i phi)``."""
    a = np.asarray(absorption, dtype=np.float64)
    phi = np.asarray(phase, dtype=np.float64)
    if a.shape != phi.shape:
        raise ValueError(f"absorption shape {a.shape} != phase shape {phi.shape}")
    if np.any(a < 0):
        raise ValueError("absorption must be non-negative")
    return complex_field(np.exp(-a + 1j * phi), copy=False)


def fth_record(u) -> np.ndarray:
    """Far-field hologram intensity ``|F[u]|^2`` with the unitary transform."""
    spectrum = fft2(complex_field(u), "forward")
    return np.abs(spectrum) ** 2


def fth_reconstruct(hologram_intensity) -> np.ndarray:
    """Inverse transform of a recorded hologram.

    For ``I = |F[u]|^2`` this is the circular autocorrelation
    ``sum_x u(x) conj(u(x - d))`` scaled by ``1/sqrt(MN)``. The forward
    transform would give the mirrored autocorrelation instead.
    """
    intensity = np.asarray(hologram_intensity, dtype=np.float64)
    if np.any(intensity < 0):
        raise ValueError("hologram intensity must be non-negative")
    return fft2(intensity, "inverse")


def extract_sideband(reconstruction, centre: tuple[int, int], size: tuple[int, int]) -> np.ndarray:
    """Crop the sideband window of ``size`` around lag ``centre`` (row, col).

    Lags wrap circularly. The crop is rescaled by ``sqrt(MN)`` so that it
    equals the raw autocorrelation values, i.e. the object itself when the
    reference is a unit impulse.
    """
    rec = np.asarray(reconstruction)
    m, n = rec.shape
    h, w = size
    rows = (np.arange(h) - h // 2 + centre[0]) % m
    cols = (np.arange(w) - w // 2 + centre[1]) % n
    return rec[np.ix_(rows, cols)] * math.sqrt(m * n)


def fov_check(setup: FTHSetup, wavelength_mm: float) -> FOVReport:
    """Field of view ``s0 = lambda Z / Delta_X`` and the two strict separation rules.

    ``sampling_ok`` requires ``s0 > 4 D``, ``separation_ok`` requires ``L > 1.5 D``.
    ``sampling_residual`` is ``Delta_X Delta_x / (lambda Z) - 1/N``.
    """
    s0 = wavelength_mm * setup.distance / setup.detector_pixel
    residual = (setup.detector_pixel * setup.object_pixel) / (wavelength_mm * setup.distance) - 1.0 / setup.samples
    return FOVReport(
        fov_s0=s0,
        sampling_ok=s0 > 4.0 * setup.object_diameter,
        separation_ok=setup.reference_separation > 1.5 * setup.object_diameter,
        sampling_residual=residual,
    )
