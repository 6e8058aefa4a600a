"""Alternating projections (Gerchberg-Saxton) over multiple target planes.

Schemes
-------
SP
    Superposition: one sub-hologram per plane, each iterated against its own
    plane only; the reported hologram is the encoded average of the
    sub-holograms.
SEQ
    Sequential: a single hologram visits the planes cyclically, imposing one
    plane's amplitude per inner step.
G
    Global: each iteration imposes all plane amplitudes at once and averages
    the back-propagated fields.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..field import HologramKind
from ..metrics import median2d
from .forward import PlaneOperator


def encode(field: np.ndarray, kind: HologramKind) -> np.ndarray:
    """Apply the hologram-plane constraint (unit modulus for POH)."""
    if kind is HologramKind.POH:
        return np.exp(1j * np.angle(field))
    return field


def project_amplitude(fields: np.ndarray, target_amp: np.ndarray, kernel: Optional[int]) -> np.ndarray:
    """Replace each plane's amplitude by the target, keeping the reconstructed phase.

    With filtering, the phase is taken from the median-filtered field (real
    and imaginary parts filtered separately), which smooths speckle out of
    the phase that is carried back to the hologram.
    """
    if kernel is not None:
        fields = np.stack([median2d(f.real, kernel) + 1j * median2d(f.imag, kernel) for f in fields])
    return target_amp * np.exp(1j * np.angle(fields))


def superposition(op: PlaneOperator, target_amp, theta, kind: HologramKind, iterations: int,
                  kernel: Optional[int], record):
    subs = encode(op.backward_each(target_amp * np.exp(1j * theta)), kind)
    holo = encode(np.mean(subs, axis=0), kind)
    for _ in range(iterations):
        fields = op.forward_each(subs)
        subs = encode(op.backward_each(project_amplitude(fields, target_amp, kernel)), kind)
        holo = encode(np.mean(subs, axis=0), kind)
        record(holo)
    return holo


def initial_hologram(op: PlaneOperator, target_amp, theta, kind: HologramKind) -> np.ndarray:
    return encode(np.mean(op.backward_each(target_amp * np.exp(1j * theta)), axis=0), kind)


def global_scheme(op: PlaneOperator, target_amp, theta, kind: HologramKind, iterations: int,
                  kernel: Optional[int], record):
    holo = initial_hologram(op, target_amp, theta, kind)
    for _ in range(iterations):
        fields = op.forward(holo)
        holo = encode(np.mean(op.backward_each(project_amplitude(fields, target_amp, kernel)), axis=0), kind)
        record(holo)
    return holo


def sequential(op: PlaneOperator, target_amp, theta, kind: HologramKind, iterations: int,
               kernel: Optional[int], record):
    holo = initial_hologram(op, target_amp, theta, kind)
    planes = [op.plane(j) for j in range(op.num_planes)]
    for _ in range(iterations):
        for j, sub in enumerate(planes):
            fields = sub.forward(holo)
            new = project_amplitude(fields, target_amp[j : j + 1], kernel)
            holo = encode(np.mean(sub.backward_each(new), axis=0), kind)
        record(holo)
    return holo
