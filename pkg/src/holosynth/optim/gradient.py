"""Gradient-based synthesis: Adam (SGD family) and L-BFGS (QN family).

The global scheme optimises one parameter set against all planes. The
superposition scheme optimises an independent sub-problem per plane (its own
phase grid, scored against its own plane only) and reports the encoded
average of the sub-holograms.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..field import HologramKind
from .adam import AdamState, adam_step
from .alternating import encode, initial_hologram
from .forward import PlaneOperator, residual
from .lbfgs import LBFGS
from .losses import ch_hologram, ch_value_and_grad, poh_value_and_grad


def _per_plane_poh(phi, op: PlaneOperator, target_amp, kernel, need_grad=True):
    """Sum over planes of independent single-plane POH losses, one phase grid per plane."""
    holos = np.exp(1j * phi)
    res = residual(op.forward_each(holos), target_amp, kernel)
    loss = res.loss * op.num_planes
    if not need_grad:
        return loss, None
    g = op.forward_each_adjoint(res.field_gradient() * op.num_planes)
    return loss, np.imag(np.conj(holos) * g)


def _per_plane_ch(psi, op: PlaneOperator, target_amp, kernel, need_grad=True):
    waves = target_amp * np.exp(1j * psi)
    subs = op.backward_each(waves)
    res = residual(op.forward_each(subs), target_amp, kernel)
    loss = res.loss * op.num_planes
    if not need_grad:
        return loss, None
    g_subs = op.forward_each_adjoint(res.field_gradient() * op.num_planes)
    return loss, np.imag(np.conj(waves) * op.backward_each_adjoint(g_subs))


class _Problem:
    """Parameters, objective and hologram assembly for one family/scheme/encoding cell."""

    def __init__(self, op: PlaneOperator, target_amp, theta, kind: HologramKind, superposed: bool,
                 kernel: Optional[int]):
        self.op, self.amp, self.kind, self.kernel = op, target_amp, kind, kernel
        self.superposed = superposed
        if kind is HologramKind.CH:
            self.x0 = np.array(theta, dtype=np.float64)
        elif superposed:
            self.x0 = np.angle(op.backward_each(target_amp * np.exp(1j * theta)))
        else:
            self.x0 = np.angle(initial_hologram(op, target_amp, theta, HologramKind.POH))

    def value_and_grad(self, x, need_grad=True):
        if self.kind is HologramKind.POH:
            fn = _per_plane_poh if self.superposed else poh_value_and_grad
        else:
            fn = _per_plane_ch if self.superposed else ch_value_and_grad
        return fn(x, self.op, self.amp, self.kernel, need_grad=need_grad)

    def value(self, x) -> float:
        return self.value_and_grad(x, need_grad=False)[0]

    def hologram(self, x) -> np.ndarray:
        if self.kind is HologramKind.POH:
            if self.superposed:
                return encode(np.mean(np.exp(1j * x), axis=0), HologramKind.POH)
            return np.exp(1j * x)
        if self.superposed:
            return np.mean(self.op.backward_each(self.amp * np.exp(1j * x)), axis=0)
        return ch_hologram(x, self.op, self.amp)


def sgd(op: PlaneOperator, target_amp, theta, kind: HologramKind, superposed: bool, iterations: int,
        lr: float, kernel: Optional[int], record):
    problem = _Problem(op, target_amp, theta, kind, superposed, kernel)
    x = problem.x0
    state = AdamState.zeros_like(x)
    for _ in range(iterations):
        _, g = problem.value_and_grad(x)
        state, x = adam_step(state, x, g, lr)
        record(problem.hologram(x))
    return problem.hologram(x)


def quasi_newton(op: PlaneOperator, target_amp, theta, kind: HologramKind, superposed: bool,
                 iterations: int, memory: int, kernel: Optional[int], record, stats: dict):
    problem = _Problem(op, target_amp, theta, kind, superposed, kernel)
    if superposed:
        # one independent optimizer per plane, advanced in lockstep
        subs = [
            _Problem(op.plane(j), target_amp[j : j + 1], theta[j : j + 1], kind, True, kernel)
            for j in range(op.num_planes)
        ]
        runs = [LBFGS(p.value_and_grad, p.x0, memory, p.value) for p in subs]
    else:
        runs = [LBFGS(problem.value_and_grad, problem.x0, memory, problem.value)]

    def current():
        return np.concatenate([r.x for r in runs]) if superposed else runs[0].x

    for _ in range(iterations):
        for r in runs:
            r.step()
        record(problem.hologram(current()))
    stats["fallbacks"] = sum(r.fallbacks for r in runs)
    stats["failed_searches"] = sum(r.failed_searches for r in runs)
    return problem.hologram(current())
