"""Hologram synthesis: alternating projections, Adam and L-BFGS over multi-plane targets."""

from .adam import AdamState, adam_step
from .api import (
    OptimizationResult,
    OptimizationTrace,
    ap_global,
    ap_sequential,
    ap_superposition,
    initial_phases,
    optimize,
    reconstruct,
    run_method,
    score,
)
from .forward import PlaneOperator
from .lbfgs import LBFGS, LBFGSHistory, lbfgs_step, two_loop
from .losses import grad_ch, grad_poh, loss_ch, loss_poh
from .spec import SUPPORTED_METHODS, Family, OptimizerSpec, Scheme, method_matrix

__all__ = [
    "AdamState",
    "adam_step",
    "LBFGS",
    "LBFGSHistory",
    "lbfgs_step",
    "two_loop",
    "loss_poh",
    "grad_poh",
    "loss_ch",
    "grad_ch",
    "optimize",
    "ap_superposition",
    "ap_sequential",
    "ap_global",
    "reconstruct",
    "run_method",
    "score",
    "initial_phases",
    "OptimizationResult",
    "OptimizationTrace",
    "OptimizerSpec",
    "Family",
    "Scheme",
    "SUPPORTED_METHODS",
    "method_matrix",
    "PlaneOperator",
]
