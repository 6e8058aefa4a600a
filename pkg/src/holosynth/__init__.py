"""Computer-generated hologram synthesis for volumetric targets."""

from .field import Hologram, HologramKind, LayerStack, OpticalConfig, complex_field, normalize_intensity, wavenumber
from .kernels import BACKEND
from .optim import OptimizerSpec, optimize, reconstruct, score
from .propagation import Model, PropagationModel, propagate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Hologram",
    "HologramKind",
    "LayerStack",
    "Model",
    "OpticalConfig",
    "OptimizerSpec",
    "PropagationModel",
    "complex_field",
    "normalize_intensity",
    "optimize",
    "propagate",
    "reconstruct",
    "score",
    "wavenumber",
]
