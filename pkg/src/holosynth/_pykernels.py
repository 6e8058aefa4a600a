"""Pure numpy implementations of the hot loops, used when the extension is absent."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def median2d_argmedian(image: np.ndarray, kernel: int) -> tuple[np.ndarray, np.ndarray]:
    ny, nx = image.shape
    r = kernel // 2
    padded = np.pad(image, r, mode="symmetric")
    windows = sliding_window_view(padded, (kernel, kernel)).reshape(ny, nx, kernel * kernel)
    # stable sort keeps raster order among ties, matching the compiled kernel
    rank = np.argsort(windows, axis=-1, kind="stable")[..., (kernel * kernel) // 2]
    values = np.take_along_axis(windows, rank[..., None], axis=-1)[..., 0]

    rows = np.arange(ny)[:, None] + rank // kernel - r
    cols = np.arange(nx)[None, :] + rank % kernel - r
    rows = _reflect(rows, ny)
    cols = _reflect(cols, nx)
    return values, rows * nx + cols


def _reflect(i: np.ndarray, n: int) -> np.ndarray:
    i = np.where(i < 0, -i - 1, i)
    return np.where(i >= n, 2 * n - i - 1, i)


def pointsource_field(xs, ys, points, amplitudes, phases, wavelength, chunk: int = 256) -> np.ndarray:
    k = 2.0 * np.pi / wavelength
    out = np.zeros((ys.size, xs.size), dtype=np.complex128)
    for start in range(0, points.shape[0], chunk):
        p = points[start : start + chunk]
        dx = xs[None, None, :] - p[:, 0, None, None]
        dy = ys[None, :, None] - p[:, 1, None, None]
        rr = np.sqrt(dx * dx + dy * dy + p[:, 2, None, None] ** 2)
        arg = k * rr + phases[start : start + chunk, None, None]
        scale = amplitudes[start : start + chunk, None, None] / rr
        out += np.sum(scale * (np.cos(arg) - 1j * np.sin(arg)), axis=0)
    return out
