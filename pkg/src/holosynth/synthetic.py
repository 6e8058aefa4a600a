"""Procedural multi-plane test targets (no external data needed)."""

from __future__ import annotations

import numpy as np

from .field import LayerStack, OpticalConfig

BENCHMARK_WAVELENGTH_MM = 532e-6
BENCHMARK_PITCH_MM = 3.74e-3


def _shapes(n: int) -> list[np.ndarray]:
    y, x = np.mgrid[0:n, 0:n] / (n - 1) - 0.5
    r = np.hypot(x, y)
    disc = (r < 0.28).astype(float)
    ring = ((r > 0.18) & (r < 0.34)).astype(float)
    square = ((np.abs(x) < 0.25) & (np.abs(y) < 0.25)).astype(float)
    cross = (((np.abs(x) < 0.08) & (np.abs(y) < 0.35)) | ((np.abs(y) < 0.08) & (np.abs(x) < 0.35))).astype(float)
    bars = ((np.abs(y) < 0.3) & (np.floor((x + 0.5) * 8) % 2 == 0) & (np.abs(x) < 0.4)).astype(float)
    triangle = ((y < 0.25) & (y > -0.3 + 2 * np.abs(x))).astype(float)
    return [disc, ring, square, cross, bars, triangle]


def benchmark_config(n: int = 64, pad_factor: int = 2) -> OpticalConfig:
    return OpticalConfig(BENCHMARK_WAVELENGTH_MM, BENCHMARK_PITCH_MM, n, n, pad_factor)


def benchmark_target(n: int = 64, planes: int = 4, first_depth_mm: float = 1.0,
                     spacing_mm: float = 0.5) -> LayerStack:
    """``planes`` binary shapes (disc, ring, square, cross, ...) at evenly spaced depths."""
    shapes = _shapes(n)
    if planes > len(shapes):
        raise ValueError(f"at most {len(shapes)} benchmark planes are available")
    depths = tuple(first_depth_mm + spacing_mm * j for j in range(planes))
    return LayerStack(np.stack(shapes[:planes]), depths)
