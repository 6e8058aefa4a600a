"""2D median filtering and the MSE / RMSE / PSNR image quality metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

__all__ = [
    "median2d",
    "median2d_with_source",
    "median2d_backward",
    "mse",
    "rmse",
    "psnr",
    "PlaneMetrics",
    "MetricsReport",
    "evaluate",
]


def _check_kernel(image: np.ndarray, kernel: int) -> None:
    if image.ndim != 2:
        raise ValueError(f"median2d expects a 2D image, got shape {image.shape}")
    if int(kernel) != kernel or kernel % 2 == 0:
        raise ValueError(f"median kernel must be odd, got {kernel}")
    if kernel < 3:
        raise ValueError(f"median kernel must be >= 3, got {kernel}")
    if kernel > min(image.shape):
        raise ValueError(f"median kernel {kernel} exceeds image size {image.shape}")


def median2d_with_source(image, kernel: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Median filter returning, per pixel, the flat index of the selected input sample.

    Edges use edge-repeating reflection. Among tied window values the
    selection is the one that comes first in the window's raster order.
    """
    img = np.ascontiguousarray(image, dtype=np.float64)
    _check_kernel(img, kernel)
    return kernels.median2d_argmedian(img, int(kernel))


def median2d(image, kernel: int = 3) -> np.ndarray:
    """Per-pixel median over a ``kernel x kernel`` window with reflective edges."""
    return median2d_with_source(image, kernel)[0]


def median2d_backward(grad_output: np.ndarray, source: np.ndarray) -> np.ndarray:
    """Pull a gradient back through :func:`median2d` (each output selects one input)."""
    flat = np.bincount(source.ravel(), weights=grad_output.ravel(), minlength=source.size)
    return flat.reshape(source.shape)


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def mse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))


def rmse(a, b) -> float:
    return math.sqrt(mse(a, b))


def psnr(a, b, peak: float = 1.0) -> float:
    """``10 log10(peak^2 / mse)`` in dB; ``inf`` for identical images."""
    return psnr_from_mse(mse(a, b), peak)


def psnr_from_mse(value: float, peak: float = 1.0) -> float:
    if value == 0:
        return math.inf
    return 10.0 * math.log10(peak**2 / value)


@dataclass(frozen=True)
class PlaneMetrics:
    mse: float
    rmse: float
    psnr: float

    @classmethod
    def from_mse(cls, value: float, peak: float = 1.0) -> "PlaneMetrics":
        return cls(value, math.sqrt(value), psnr_from_mse(value, peak))


@dataclass(frozen=True)
class MetricsReport:
    """Stack-level metrics plus the per-plane breakdown.

    The stack MSE is the mean over all planes and pixels, so it equals the
    average of the per-plane MSEs.
    """

    mse: float
    rmse: float
    psnr: float
    per_plane: tuple[PlaneMetrics, ...] = field(default_factory=tuple)
    filtered: bool = False


def evaluate(reconstructions, targets, filtered: bool = False, peak: float = 1.0) -> MetricsReport:
    """Metrics between stacks of reconstructed and target intensities, shape (J, ny, nx)."""
    rec, tgt = _pair(reconstructions, targets)
    if rec.ndim == 2:
        rec, tgt = rec[None], tgt[None]
    per_plane = tuple(PlaneMetrics.from_mse(mse(r, t), peak) for r, t in zip(rec, tgt))
    total = PlaneMetrics.from_mse(mse(rec, tgt), peak)
    return MetricsReport(total.mse, total.rmse, total.psnr, per_plane, filtered)
