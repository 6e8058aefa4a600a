"""Adam with bias correction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros_like(cls, params) -> "AdamState":
        params = np.asarray(params, dtype=np.float64)
        return cls(np.zeros_like(params), np.zeros_like(params), 0)


def adam_step(state: AdamState, params, grad, lr: float) -> tuple[AdamState, np.ndarray]:
    """One Adam update; returns the new state and the updated parameters."""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.m.shape:
        raise ValueError(f"gradient shape {grad.shape} != state shape {state.m.shape}")
    t = state.t + 1
    m = BETA1 * state.m + (1.0 - BETA1) * grad
    v = BETA2 * state.v + (1.0 - BETA2) * grad * grad
    m_hat = m / (1.0 - BETA1**t)
    v_hat = v / (1.0 - BETA2**t)
    params = np.asarray(params, dtype=np.float64) - lr * m_hat / (np.sqrt(v_hat) + EPSILON)
    return AdamState(m, v, t), params
