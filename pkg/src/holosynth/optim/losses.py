"""Amplitude losses for phase-only and complex holograms, with adjoint gradients.

Phase-only: the hologram is ``exp(i phi)`` and every target plane is reached
by forward propagation. Complex: the free parameters are the object-plane
phases ``psi_j``; the hologram is the average of the back-propagated object
waves ``sqrt(I_j) exp(i psi_j)`` and is propagated forward again to score
each plane.

Both losses are the mean over planes and pixels of ``(s_j m_j - sqrt(I_j))^2``
where ``m_j`` is the (optionally median filtered) reconstructed amplitude and
``s_j`` its closed-form least-squares scale.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..field import LayerStack, OpticalConfig
from ..propagation import Model
from .forward import PlaneOperator, residual

__all__ = [
    "loss_poh",
    "grad_poh",
    "loss_ch",
    "grad_ch",
    "poh_value_and_grad",
    "ch_value_and_grad",
    "ch_hologram",
]


def _operator(target: LayerStack, config: OpticalConfig, model: Model) -> PlaneOperator:
    target.check_grid(config)
    return PlaneOperator(config, target.depths, model)


def poh_value_and_grad(phi, op: PlaneOperator, target_amp, kernel: Optional[int] = None, *, need_grad=True):
    phi = np.asarray(phi, dtype=np.float64)
    holo = np.exp(1j * phi)
    res = residual(op.forward(holo), target_amp, kernel)
    if not need_grad:
        return res.loss, None
    g_holo = op.forward_adjoint(res.field_gradient())
    return res.loss, np.imag(np.conj(holo) * g_holo)


def ch_hologram(psi, op: PlaneOperator, target_amp) -> np.ndarray:
    """Average of the back-propagated object waves ``sqrt(I_j) exp(i psi_j)``."""
    waves = target_amp * np.exp(1j * np.asarray(psi, dtype=np.float64))
    return np.mean(op.backward_each(waves), axis=0)


def ch_value_and_grad(psi, op: PlaneOperator, target_amp, kernel: Optional[int] = None, *, need_grad=True):
    psi = np.broadcast_to(np.asarray(psi, dtype=np.float64), target_amp.shape)
    waves = target_amp * np.exp(1j * psi)
    holo = np.mean(op.backward_each(waves), axis=0)
    res = residual(op.forward(holo), target_amp, kernel)
    if not need_grad:
        return res.loss, None
    g_holo = op.forward_adjoint(res.field_gradient())
    g_waves = op.backward_each_adjoint(np.broadcast_to(g_holo, waves.shape)) / op.num_planes
    return res.loss, np.imag(np.conj(waves) * g_waves)


def loss_poh(phi, target: LayerStack, config: OpticalConfig, median_kernel: Optional[int] = None,
             model: Model = Model.ASM) -> float:
    """Phase-only hologram loss of the phase grid ``phi``."""
    op = _operator(target, config, model)
    return poh_value_and_grad(phi, op, target.amplitudes, median_kernel, need_grad=False)[0]


def grad_poh(phi, target: LayerStack, config: OpticalConfig, median_kernel: Optional[int] = None,
             model: Model = Model.ASM) -> np.ndarray:
    """Exact gradient of :func:`loss_poh` with respect to ``phi``."""
    op = _operator(target, config, model)
    return poh_value_and_grad(phi, op, target.amplitudes, median_kernel)[1]


def loss_ch(psi, target: LayerStack, config: OpticalConfig, median_kernel: Optional[int] = None,
            model: Model = Model.ASM) -> float:
    """Complex hologram loss of the object phases ``psi``.

    ``psi`` is either one ``(ny, nx)`` grid shared by all planes or a
    ``(J, ny, nx)`` stack.
    """
    op = _operator(target, config, model)
    return ch_value_and_grad(psi, op, target.amplitudes, median_kernel, need_grad=False)[0]


def grad_ch(psi, target: LayerStack, config: OpticalConfig, median_kernel: Optional[int] = None,
            model: Model = Model.ASM) -> np.ndarray:
    """Exact gradient of :func:`loss_ch`, shape ``(J, ny, nx)``."""
    op = _operator(target, config, model)
    grad = ch_value_and_grad(psi, op, target.amplitudes, median_kernel)[1]
    if np.ndim(psi) == 2:
        return grad.sum(axis=0) if grad.shape[0] > 1 else grad[0]
    return grad
