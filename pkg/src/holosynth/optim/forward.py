"""Batched multi-plane propagation and the scaled amplitude residual shared by all families."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..field import OpticalConfig
from ..metrics import median2d_backward, median2d_with_source
from ..propagation import Model, PropagationModel, crop, pad, transfer_function


class PlaneOperator:
    """Propagators between the hologram plane and ``J`` target planes.

    ``forward`` maps a hologram to all planes (``F_j``), ``backward`` maps
    per-plane fields to the hologram plane (propagation by ``-z_j``, ``B_j``).
    The ``*_adjoint`` methods apply the Hermitian adjoints used for gradients.
    """

    def __init__(self, config: OpticalConfig, depths: Sequence[float], model: Model = Model.ASM):
        self.config = config
        self.depths = tuple(float(z) for z in depths)
        self._fwd = np.stack([transfer_function(config, PropagationModel(model, z)) for z in self.depths])
        self._bwd = np.stack([transfer_function(config, PropagationModel(model, -z)) for z in self.depths])

    @property
    def num_planes(self) -> int:
        return len(self.depths)

    def _spectrum(self, fields: np.ndarray) -> np.ndarray:
        return np.fft.fft2(pad(fields, self.config.padded_shape), norm="ortho")

    def _field(self, spectrum: np.ndarray) -> np.ndarray:
        return crop(np.fft.ifft2(spectrum, norm="ortho"), self.config.shape)

    def forward(self, hologram: np.ndarray) -> np.ndarray:
        """Hologram ``(ny, nx)`` to every plane, ``(J, ny, nx)``."""
        return self._field(self._spectrum(hologram)[None] * self._fwd)

    def forward_each(self, fields: np.ndarray) -> np.ndarray:
        """Plane ``j`` of ``fields`` forward to depth ``z_j``."""
        return self._field(self._spectrum(fields) * self._fwd)

    def backward_each(self, fields: np.ndarray) -> np.ndarray:
        """Plane ``j`` of ``fields`` back to the hologram plane."""
        return self._field(self._spectrum(fields) * self._bwd)

    def forward_adjoint(self, grads: np.ndarray) -> np.ndarray:
        """Adjoint of :meth:`forward`: ``sum_j F_j^H g_j``."""
        return self._field(np.sum(self._spectrum(grads) * np.conj(self._fwd), axis=0))

    def forward_each_adjoint(self, grads: np.ndarray) -> np.ndarray:
        return self._field(self._spectrum(grads) * np.conj(self._fwd))

    def backward_each_adjoint(self, grads: np.ndarray) -> np.ndarray:
        return self._field(self._spectrum(grads) * np.conj(self._bwd))

    def plane(self, j: int) -> "PlaneOperator":
        sub = object.__new__(PlaneOperator)
        sub.config = self.config
        sub.depths = (self.depths[j],)
        sub._fwd = self._fwd[j : j + 1]
        sub._bwd = self._bwd[j : j + 1]
        return sub


def least_squares_scale(amplitude: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Per-plane ``s = sum(a t) / sum(a^2)``; 0 where the reconstruction or target is null."""
    num = np.sum(amplitude * target, axis=(-2, -1))
    den = np.sum(amplitude * amplitude, axis=(-2, -1))
    safe = np.where(den > 0, den, 1.0)
    return np.where(den > 0, num / safe, 0.0)


def filtered_amplitude(fields: np.ndarray, kernel: Optional[int]):
    """``|fields|`` per plane, median filtered when ``kernel`` is set.

    Returns the amplitudes and, when filtering, the per-plane source indices.
    """
    amp = np.abs(fields)
    if kernel is None:
        return amp, None
    out = np.empty_like(amp)
    sources = np.empty(amp.shape, dtype=np.intp)
    for j in range(amp.shape[0]):
        out[j], sources[j] = median2d_with_source(amp[j], kernel)
    return out, sources


@dataclass
class Residual:
    """Scaled amplitude residual ``s m - t`` of a stack of reconstructed fields."""

    fields: np.ndarray
    amplitude: np.ndarray
    scale: np.ndarray
    residual: np.ndarray
    sources: Optional[np.ndarray]

    @property
    def loss(self) -> float:
        return float(np.mean(self.residual**2))

    @property
    def intensity(self) -> np.ndarray:
        """Reconstructed intensity after the least-squares brightness scale."""
        return (self.scale[:, None, None] * self.amplitude) ** 2

    def field_gradient(self) -> np.ndarray:
        """``dL/dRe(r) + i dL/dIm(r)`` for each reconstructed field ``r``.

        ``s`` is the exact minimiser over the scale, so it is held fixed.
        """
        d_amp = (2.0 / self.residual.size) * self.scale[:, None, None] * self.residual
        if self.sources is not None:
            d_amp = np.stack([median2d_backward(d_amp[j], self.sources[j]) for j in range(d_amp.shape[0])])
        raw = np.abs(self.fields)
        unit = np.divide(self.fields, raw, out=np.zeros_like(self.fields), where=raw > 0)
        return d_amp * unit


def residual(fields: np.ndarray, target_amplitude: np.ndarray, kernel: Optional[int] = None) -> Residual:
    amp, sources = filtered_amplitude(fields, kernel)
    scale = least_squares_scale(amp, target_amplitude)
    res = scale[:, None, None] * amp - target_amplitude
    return Residual(fields, amp, scale, res, sources)
