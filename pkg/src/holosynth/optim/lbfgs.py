"""Limited-memory BFGS: two-loop recursion and Armijo backtracking."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Deque, Optional

import numpy as np

CURVATURE_EPS = 1e-10
ARMIJO_C = 1e-4
MAX_BACKTRACKS = 20


@dataclass
class LBFGSHistory:
    """The most recent ``memory`` curvature pairs ``(s, y)``."""

    memory: int = 10
    pairs: Deque[tuple[np.ndarray, np.ndarray, float]] = field(default_factory=deque)

    def update(self, s: np.ndarray, y: np.ndarray) -> bool:
        """Store a pair; pairs with ``s.y <= 1e-10`` are skipped. Returns whether stored."""
        sy = float(np.vdot(s, y).real)
        if sy <= CURVATURE_EPS:
            return False
        self.pairs.append((s, y, 1.0 / sy))
        while len(self.pairs) > self.memory:
            self.pairs.popleft()
        return True

    def clear(self) -> None:
        self.pairs.clear()

    def __len__(self) -> int:
        return len(self.pairs)


def two_loop(history: LBFGSHistory, grad: np.ndarray) -> np.ndarray:
    """Approximate ``-H^{-1} grad``; with no history this is ``-grad``."""
    q = np.array(grad, dtype=np.float64, copy=True)
    alphas = []
    for s, y, rho in reversed(history.pairs):
        a = rho * float(np.vdot(s, q).real)
        q -= a * y
        alphas.append(a)
    if history.pairs:
        s, y, _ = history.pairs[-1]
        q *= float(np.vdot(s, y).real) / float(np.vdot(y, y).real)
    for (s, y, rho), a in zip(history.pairs, reversed(alphas)):
        b = rho * float(np.vdot(y, q).real)
        q += (a - b) * s
    return -q


def lbfgs_step(history: LBFGSHistory, grad: np.ndarray) -> tuple[np.ndarray, LBFGSHistory, bool]:
    """Search direction for ``grad``.

    Returns ``(direction, history, fell_back)``. If the two-loop direction is
    not a descent direction the history is cleared and steepest descent is
    returned with ``fell_back=True``.
    """
    direction = two_loop(history, grad)
    if float(np.vdot(direction, grad).real) >= 0:
        history.clear()
        return -np.asarray(grad, dtype=np.float64), history, True
    return direction, history, False


def armijo(fun: Callable[[np.ndarray], float], x: np.ndarray, fx: float, grad: np.ndarray,
           direction: np.ndarray, step: float = 1.0) -> Optional[tuple[float, np.ndarray, float]]:
    """Backtrack (halving) until ``f(x + a d) <= f(x) + c a g.d``.

    Returns ``(step, x_new, f_new)`` or ``None`` after ``MAX_BACKTRACKS`` failures.
    """
    slope = float(np.vdot(grad, direction).real)
    for _ in range(MAX_BACKTRACKS + 1):
        x_new = x + step * direction
        f_new = fun(x_new)
        if f_new <= fx + ARMIJO_C * step * slope:
            return step, x_new, f_new
        step *= 0.5
    return None


class LBFGS:
    """Stepwise L-BFGS with Armijo backtracking.

    The first step (and any step after a history reset) is scaled to unit
    length. ``fallbacks`` counts iterations that reverted to steepest descent,
    ``failed_searches`` those where no acceptable step was found.
    """

    def __init__(self, value_and_grad: Callable[[np.ndarray], tuple[float, np.ndarray]], x0,
                 memory: int = 10, value: Optional[Callable[[np.ndarray], float]] = None):
        self._value_and_grad = value_and_grad
        self._value = value or (lambda z: value_and_grad(z)[0])
        self.x = np.array(x0, dtype=np.float64, copy=True)
        self.fx, self.grad = value_and_grad(self.x)
        self.history = LBFGSHistory(memory)
        self.fallbacks = 0
        self.failed_searches = 0

    def step(self) -> float:
        g = self.grad
        if not np.any(g):
            return self.fx
        direction, self.history, fell_back = lbfgs_step(self.history, g)
        self.fallbacks += fell_back
        step = 1.0
        if len(self.history) == 0:
            step = 1.0 / float(np.linalg.norm(direction))
        found = armijo(self._value, self.x, self.fx, g, direction, step)
        if found is None:
            self.failed_searches += 1
            self.history.clear()
            return self.fx
        x_new = found[1]
        f_new, g_new = self._value_and_grad(x_new)
        self.history.update(x_new - self.x, g_new - g)
        self.x, self.fx, self.grad = x_new, f_new, g_new
        return self.fx


def minimize(value_and_grad, x0, iterations: int, memory: int = 10, value=None) -> LBFGS:
    """Run ``iterations`` L-BFGS steps from ``x0`` and return the finished optimizer."""
    opt = LBFGS(value_and_grad, x0, memory, value)
    for _ in range(iterations):
        opt.step()
    return opt
