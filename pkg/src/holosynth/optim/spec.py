"""Optimizer selection: family x scheme x encoding, iteration budget and filtering."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from ..field import HologramKind

__all__ = ["Family", "Scheme", "OptimizerSpec", "SUPPORTED_METHODS", "method_matrix"]


class Family(str, Enum):
    AP = "AP"
    SGD = "SGD"
    QN = "QN"


class Scheme(str, Enum):
    SP = "SP"
    SEQ = "SEQ"
    G = "G"


SUPPORTED_METHODS = {
    Family.AP: (Scheme.SP, Scheme.SEQ, Scheme.G),
    Family.SGD: (Scheme.SP, Scheme.G),
    Family.QN: (Scheme.SP, Scheme.G),
}


def _matrix_text() -> str:
    rows = [f"{fam.value}x{{{','.join(s.value for s in schemes)}}}" for fam, schemes in SUPPORTED_METHODS.items()]
    return ", ".join(rows) + ", each x {POH,CH}"


@dataclass(frozen=True)
class OptimizerSpec:
    """One cell of the method matrix.

    ``median_kernel`` is ``None`` when filtering is off, otherwise the odd
    kernel size of the in-loop median filter.
    """

    family: Family
    scheme: Scheme
    encoding: HologramKind
    iterations: int = 50
    learning_rate: float = 0.05
    lbfgs_memory: int = 10
    median_kernel: Optional[int] = None
    seed: int = 0
    zero_phase_start: bool = False

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "encoding", HologramKind(self.encoding))
        if self.scheme not in SUPPORTED_METHODS[self.family]:
            raise ValueError(
                f"unsupported method {self.family.value}-{self.scheme.value}; "
                f"supported matrix: {_matrix_text()}"
            )
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ValueError(f"iterations must be a positive integer, got {self.iterations}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.lbfgs_memory < 1:
            raise ValueError(f"lbfgs_memory must be >= 1, got {self.lbfgs_memory}")
        k = self.median_kernel
        if k is not None and (int(k) != k or k < 3 or k % 2 == 0):
            raise ValueError(f"median kernel must be an odd integer >= 3, got {k}")

    @property
    def filtering(self) -> bool:
        return self.median_kernel is not None

    @property
    def name(self) -> str:
        return f"{self.family.value}-{self.scheme.value}-{self.encoding.value}"

    def with_filter(self, kernel: Optional[int]) -> "OptimizerSpec":
        return replace(self, median_kernel=kernel)

    def with_seed(self, seed: int) -> "OptimizerSpec":
        return replace(self, seed=seed)


def method_matrix(**common) -> list[OptimizerSpec]:
    """All 14 supported family/scheme/encoding combinations."""
    specs = []
    for family, schemes in SUPPORTED_METHODS.items():
        for scheme in schemes:
            for encoding in (HologramKind.CH, HologramKind.POH):
                specs.append(OptimizerSpec(family, scheme, encoding, **common))
    return specs
