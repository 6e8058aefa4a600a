"""Entry points: dispatch over the method matrix and reconstruct holograms."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from ..field import Hologram, HologramKind, LayerStack, OpticalConfig
from ..metrics import MetricsReport, evaluate
from ..propagation import Model
from . import alternating, gradient
from .forward import PlaneOperator, filtered_amplitude, least_squares_scale, residual
from .spec import Family, OptimizerSpec, Scheme

__all__ = [
    "OptimizationTrace",
    "OptimizationResult",
    "initial_phases",
    "optimize",
    "ap_superposition",
    "ap_sequential",
    "ap_global",
    "run_method",
    "reconstruct",
    "score",
]


@dataclass
class OptimizationTrace:
    """Per-iteration loss, intensity RMSE and wall time of the encoded hologram.

    ``loss`` is the objective the method sees (filtered amplitudes when
    filtering is on); ``rmse`` always scores the unfiltered reconstruction.
    """

    loss: list = field(default_factory=list)
    rmse: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    fallbacks: int = 0
    failed_searches: int = 0

    def __len__(self) -> int:
        return len(self.loss)


class OptimizationResult(NamedTuple):
    hologram: Hologram
    trace: OptimizationTrace


def initial_phases(spec: OptimizerSpec, shape: tuple[int, ...]) -> np.ndarray:
    """Per-plane uniform random phases in ``[0, 2 pi)`` drawn from ``spec.seed``."""
    if spec.zero_phase_start:
        return np.zeros(shape)
    rng = np.random.default_rng(spec.seed)
    return rng.uniform(0.0, 2.0 * np.pi, size=shape)


def run_method(op: PlaneOperator, target_amp: np.ndarray, spec: OptimizerSpec,
               theta: Optional[np.ndarray] = None) -> OptimizationResult:
    """Run one method on raw arrays; ``target_amp`` has shape ``(J, ny, nx)``.

    Unlike :func:`optimize` this does not require strictly increasing depths.
    """
    target_amp = np.asarray(target_amp, dtype=np.float64)
    if theta is None:
        theta = initial_phases(spec, target_amp.shape)
    target_int = target_amp**2
    kernel = spec.median_kernel
    trace = OptimizationTrace()
    clock = [time.perf_counter()]

    def record(holo):
        fields = op.forward(holo)
        physical = residual(fields, target_amp)
        objective = physical if kernel is None else residual(fields, target_amp, kernel)
        trace.loss.append(objective.loss)
        # RMSE always scores the unfiltered reconstruction the hologram actually produces
        trace.rmse.append(float(np.sqrt(np.mean((physical.intensity - target_int) ** 2))))
        now = time.perf_counter()
        trace.seconds.append(now - clock[0])
        clock[0] = now

    kind = spec.encoding
    if spec.family is Family.AP:
        scheme_fn = {
            Scheme.SP: alternating.superposition,
            Scheme.SEQ: alternating.sequential,
            Scheme.G: alternating.global_scheme,
        }[spec.scheme]
        holo = scheme_fn(op, target_amp, theta, kind, spec.iterations, kernel, record)
    elif spec.family is Family.SGD:
        holo = gradient.sgd(op, target_amp, theta, kind, spec.scheme is Scheme.SP, spec.iterations,
                            spec.learning_rate, kernel, record)
    else:
        stats: dict = {}
        holo = gradient.quasi_newton(op, target_amp, theta, kind, spec.scheme is Scheme.SP,
                                     spec.iterations, spec.lbfgs_memory, kernel, record, stats)
        trace.fallbacks = stats["fallbacks"]
        trace.failed_searches = stats["failed_searches"]

    if kind is HologramKind.POH:
        hologram = Hologram.phase_only(holo)
    else:
        hologram = Hologram.complex(holo)
    return OptimizationResult(hologram, trace)


def optimize(target: LayerStack, config: OpticalConfig, spec: OptimizerSpec,
             model: Model = Model.ASM) -> OptimizationResult:
    """Synthesise a hologram for ``target`` with the method selected by ``spec``.

    The result is a pure function of the inputs, including ``spec.seed``.
    """
    if not isinstance(spec, OptimizerSpec):
        raise TypeError("spec must be an OptimizerSpec")
    target.check_grid(config)
    op = PlaneOperator(config, target.depths, model)
    return run_method(op, target.amplitudes, spec)


def _ap(scheme: Scheme, name: str, doc: str):
    def run(target: LayerStack, config: OpticalConfig, spec: OptimizerSpec,
            model: Model = Model.ASM) -> OptimizationResult:
        return optimize(target, config, replace(spec, family=Family.AP, scheme=scheme), model)

    run.__name__ = run.__qualname__ = name
    run.__doc__ = doc
    return run


ap_superposition = _ap(Scheme.SP, "ap_superposition",
                       "Alternating projections on independent per-plane sub-holograms, complex-averaged.")
ap_sequential = _ap(Scheme.SEQ, "ap_sequential", "Alternating projections visiting one plane per inner step.")
ap_global = _ap(Scheme.G, "ap_global", "Alternating projections imposing every plane constraint per iteration.")


def reconstruct(hologram: Hologram, config: OpticalConfig, depths: Sequence[float],
                target: Optional[LayerStack] = None, median_kernel: Optional[int] = None,
                model: Model = Model.ASM) -> list[np.ndarray]:
    """Reconstructed intensity ``|propagate(hologram, z)|^2`` at each depth.

    With a ``target`` each plane is scaled by the least-squares amplitude
    scale against the matching target plane; without one each plane is
    divided by its peak so that it lies in ``[0, 1]``. ``median_kernel``
    filters the reconstructed amplitude first.
    """
    depths = list(depths)
    if not depths:
        raise ValueError("reconstruct needs at least one depth")
    op = PlaneOperator(config, depths, model)
    amp, _ = filtered_amplitude(op.forward(hologram.field), median_kernel)
    if target is not None:
        if len(target.depths) != len(depths):
            raise ValueError("target plane count does not match the requested depths")
        scale = least_squares_scale(amp, target.amplitudes)
        return list((scale[:, None, None] * amp) ** 2)
    out = []
    for plane in amp**2:
        peak = plane.max()
        out.append(plane / peak if peak > 0 else plane)
    return out


def score(hologram: Hologram, target: LayerStack, config: OpticalConfig, filtered: bool = False,
          model: Model = Model.ASM) -> MetricsReport:
    """Metrics of the unfiltered, least-squares scaled reconstruction against ``target``.

    ``filtered`` only tags the report with whether the run used in-loop filtering.
    """
    recon = reconstruct(hologram, config, target.depths, target, None, model)
    return evaluate(np.stack(recon), target.intensities, filtered=filtered)
