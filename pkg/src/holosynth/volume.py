"""Volumetric targets: point clouds, voxel grids, shading and point-source holograms.

Voxel arrays are stored ``(nz, ny, nx)`` so that ``grid.values[k]`` is the
``k``-th depth slice. Vectors (light direction, normals) are ``(x, y, z)``.
The hologram plane is ``z = 0`` and the volume lies at positive ``z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .field import LayerStack, OpticalConfig

__all__ = [
    "PointCloud",
    "VoxelGrid",
    "LightingParams",
    "PlaneWave",
    "voxelize",
    "voxel_centers",
    "attenuate",
    "surface_normals",
    "lambert_reflect",
    "reflected_intensity",
    "render_layers",
    "render_points",
    "pointsource_field",
    "pointsource_hologram",
]

_RAYS = {"+x": (2, False), "-x": (2, True), "+y": (1, False), "-y": (1, True), "+z": (0, False), "-z": (0, True)}


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Points ``(N, 3)`` in mm with per-point intensity in ``[0, 1]`` (default 1)."""

    points: np.ndarray
    intensities: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64).reshape(-1, 3)
        if pts.shape[0] == 0:
            raise ValueError("point cloud is empty")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        if self.intensities is None:
            inten = np.ones(pts.shape[0])
        else:
            inten = np.array(self.intensities, dtype=np.float64).reshape(-1)
            if inten.shape[0] != pts.shape[0]:
                raise ValueError(f"{pts.shape[0]} points but {inten.shape[0]} intensities")
            if np.any(inten < 0) or np.any(inten > 1) or not np.all(np.isfinite(inten)):
                raise ValueError("point intensities must lie in [0, 1]")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "intensities", inten)

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """Voxel values and opacities in ``[0, 1]``, both shaped ``(nz, ny, nx)``.

    ``voxel_size`` is ``(dx, dy, dz)`` in mm; a scalar means cubic voxels.
    """

    values: np.ndarray
    opacity: Optional[np.ndarray] = None
    voxel_size: Sequence[float] | float = 1.0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 3:
            raise ValueError(f"voxel values must be 3D (nz, ny, nx), got shape {values.shape}")
        opacity = values.copy() if self.opacity is None else np.array(self.opacity, dtype=np.float64)
        if opacity.shape != values.shape:
            raise ValueError(f"opacity shape {opacity.shape} != values shape {values.shape}")
        for name, arr in (("values", values), ("opacity", opacity)):
            if not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 1:
                raise ValueError(f"voxel {name} must lie in [0, 1]")
        size = np.broadcast_to(np.asarray(self.voxel_size, dtype=np.float64), (3,))
        if np.any(size <= 0):
            raise ValueError(f"voxel size must be positive, got {self.voxel_size}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "opacity", opacity)
        object.__setattr__(self, "voxel_size", tuple(float(s) for s in size))

    @property
    def dims(self) -> tuple[int, int, int]:
        """``(nx, ny, nz)``."""
        nz, ny, nx = self.values.shape
        return nx, ny, nz

    def with_opacity_map(self, xs: Sequence[float], ys: Sequence[float]) -> "VoxelGrid":
        """Opacity from a piecewise-linear transfer function of the voxel values."""
        alpha = np.clip(np.interp(self.values, xs, ys), 0.0, 1.0)
        return VoxelGrid(self.values, alpha, self.voxel_size)


@dataclass(frozen=True)
class LightingParams:
    """Source intensity ``I_d0``, Lambert ratio ``k_d`` and unit vector towards the light."""

    source_intensity: float = 1.0
    lambert_ratio: float = 1.0
    light_direction: tuple[float, float, float] = (0.0, 0.0, -1.0)

    def __post_init__(self):
        if self.source_intensity < 0:
            raise ValueError("source intensity must be >= 0")
        if not 0 <= self.lambert_ratio <= 1:
            raise ValueError("Lambert ratio must lie in [0, 1]")
        norm = math.sqrt(sum(c * c for c in self.light_direction))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"light direction must be a unit vector, got norm {norm}")
        object.__setattr__(self, "light_direction", tuple(float(c) for c in self.light_direction))


@dataclass(frozen=True)
class PlaneWave:
    """Parallel reference light ``A exp(i k (x sin(theta_x) + y sin(theta_y)))``."""

    amplitude: float = 1.0
    angle_x: float = 0.0
    angle_y: float = 0.0


def voxelize(cloud: PointCloud, dims: tuple[int, int, int],
             bounds: Sequence[tuple[float, float]]) -> VoxelGrid:
    """Bin points into a ``dims = (nx, ny, nz)`` grid spanning ``bounds`` (per axis ``(lo, hi)``).

    A voxel takes the maximum intensity of its points; empty voxels are 0.
    Points outside the bounds are ignored; points on an upper bound fall in
    the last voxel.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) < 1:
        raise ValueError(f"dims must be three positive counts, got {dims}")
    lo = np.array([b[0] for b in bounds], dtype=np.float64)
    hi = np.array([b[1] for b in bounds], dtype=np.float64)
    if lo.shape != (3,) or np.any(~np.isfinite(lo)) or np.any(~np.isfinite(hi)) or np.any(hi <= lo):
        raise ValueError(f"degenerate bounds {bounds}")
    pts = cloud.points
    inside = np.all((pts >= lo) & (pts <= hi), axis=1)
    if not np.any(inside):
        raise ValueError("bounds enclose no points")
    n = np.array(dims)
    idx = np.floor((pts[inside] - lo) / (hi - lo) * n).astype(np.int64)
    idx = np.minimum(idx, n - 1)
    values = np.zeros((dims[2], dims[1], dims[0]))
    np.maximum.at(values, (idx[:, 2], idx[:, 1], idx[:, 0]), cloud.intensities[inside])
    return VoxelGrid(values, voxel_size=tuple((hi - lo) / n))


def voxel_centers(grid: VoxelGrid, origin: Sequence[float] = (0.0, 0.0, 0.0),
                  threshold: float = 0.0) -> PointCloud:
    """Centres of voxels whose value exceeds ``threshold``, as a cloud carrying those values."""
    k, j, i = np.nonzero(grid.values > threshold)
    if k.size == 0:
        raise ValueError("no voxel exceeds the threshold")
    size = np.asarray(grid.voxel_size)
    pts = np.asarray(origin, dtype=np.float64) + (np.stack([i, j, k], axis=1) + 0.5) * size
    return PointCloud(pts, grid.values[k, j, i])


def _ray_axis(ray: str) -> tuple[int, bool]:
    try:
        return _RAYS[ray]
    except KeyError:
        raise ValueError(f"ray must be one of {sorted(_RAYS)}, got {ray!r}") from None


def attenuate(grid: VoxelGrid, lighting: LightingParams, ray: str = "+z") -> np.ndarray:
    """Incident intensity ``I_d0 * prod_{j<=i} (1 - alpha_j)`` along an axis-aligned ray.

    ``ray`` is the direction of travel; the default enters the volume from the
    hologram side and walks towards larger ``z``.
    """
    axis, reverse = _ray_axis(ray)
    alpha = grid.opacity
    if reverse:
        alpha = np.flip(alpha, axis=axis)
    incident = lighting.source_intensity * np.cumprod(1.0 - alpha, axis=axis)
    return np.flip(incident, axis=axis) if reverse else incident


def surface_normals(grid: VoxelGrid) -> np.ndarray:
    """Unit normals ``-grad(alpha)/|grad(alpha)|``, shape ``(nz, ny, nx, 3)`` as ``(x, y, z)``.

    Central differences inside, one-sided at the boundary. Normals point from
    opaque towards transparent; voxels with zero gradient get a zero vector.
    """
    dx, dy, dz = grid.voxel_size
    axes = [n for n in range(3) if grid.opacity.shape[n] > 1]
    spacing = [(dz, dy, dx)[n] for n in axes]
    grads = [np.zeros_like(grid.opacity)] * 3
    if axes:
        computed = np.gradient(grid.opacity, *spacing, axis=tuple(axes))
        if len(axes) == 1:
            computed = [computed]
        for n, g in zip(axes, computed):
            grads[n] = g
    gz, gy, gx = grads
    vec = -np.stack([gx, gy, gz], axis=-1)
    norm = np.linalg.norm(vec, axis=-1, keepdims=True)
    return np.divide(vec, norm, out=np.zeros_like(vec), where=norm > 0)


def lambert_reflect(incident, lighting: LightingParams, normal) -> np.ndarray:
    """Reflected intensity ``k_d * I_d * max(0, L . N_hat)``; zero normals reflect nothing."""
    normal = np.asarray(normal, dtype=np.float64)
    norm = np.linalg.norm(normal, axis=-1)
    cos = np.einsum("...k,k->...", normal, np.asarray(lighting.light_direction))
    cos = np.divide(cos, norm, out=np.zeros_like(cos), where=norm > 0)
    return lighting.lambert_ratio * np.asarray(incident, dtype=np.float64) * np.maximum(0.0, cos)


def reflected_intensity(grid: VoxelGrid, lighting: LightingParams, ray: str = "+z") -> np.ndarray:
    return lambert_reflect(attenuate(grid, lighting, ray), lighting, surface_normals(grid))


def render_layers(grid: VoxelGrid, lighting: LightingParams, planes: int,
                  config: Optional[OpticalConfig] = None, z_offset: float = 0.0,
                  ray: str = "+z") -> LayerStack:
    """Partition the depth slices into ``planes`` contiguous bins and max-project each.

    Layer depths are the bin centres, ``z_offset + mean((k + 0.5) dz)``. The
    stack is divided by its global peak so intensities lie in ``[0, 1]``.
    """
    nz = grid.values.shape[0]
    if planes < 1 or planes > nz:
        raise ValueError(f"plane count {planes} must lie in [1, {nz}]")
    if config is not None and grid.values.shape[1:] != config.shape:
        raise ValueError(f"voxel slices are {grid.values.shape[1:]} but the SLM grid is {config.shape}")
    reflected = reflected_intensity(grid, lighting, ray)
    dz = grid.voxel_size[2]
    images, depths = [], []
    for bin_slices in np.array_split(np.arange(nz), planes):
        images.append(reflected[bin_slices].max(axis=0))
        depths.append(z_offset + float(np.mean((bin_slices + 0.5) * dz)))
    stack = np.stack(images)
    peak = stack.max()
    if peak > 0:
        stack = stack / peak
    return LayerStack(np.clip(stack, 0.0, 1.0), tuple(depths))


def render_points(grid: VoxelGrid, lighting: LightingParams, z_offset: float,
                  ray: str = "+z") -> PointCloud:
    """Lit voxels as point sources whose intensity is the reflected light (peak-normalised)."""
    reflected = reflected_intensity(grid, lighting, ray)
    peak = reflected.max()
    if peak <= 0:
        raise ValueError("no voxel reflects any light")
    nx, ny, _ = grid.dims
    size = np.asarray(grid.voxel_size)
    origin = (-nx * size[0] / 2.0, -ny * size[1] / 2.0, z_offset)
    lit = VoxelGrid(reflected / peak, np.zeros_like(reflected), grid.voxel_size)
    return voxel_centers(lit, origin)


def _hologram_coords(config: OpticalConfig) -> tuple[np.ndarray, np.ndarray]:
    xs = (np.arange(config.nx) - config.nx // 2) * config.pixel_pitch_mm
    ys = (np.arange(config.ny) - config.ny // 2) * config.pixel_pitch_mm
    return xs, ys


def pointsource_field(cloud: PointCloud, config: OpticalConfig, phases) -> np.ndarray:
    """Object wave ``sum_i (I_i / r_i) exp(-j (2 pi r_i / lambda + phi_i))`` on the hologram grid."""
    if np.any(cloud.points[:, 2] <= 0):
        raise ValueError("every point must lie in front of the hologram plane (z > 0)")
    xs, ys = _hologram_coords(config)
    return kernels.pointsource_field(
        np.ascontiguousarray(xs), np.ascontiguousarray(ys), np.ascontiguousarray(cloud.points),
        np.ascontiguousarray(cloud.intensities), np.ascontiguousarray(phases, dtype=np.float64),
        config.wavelength_mm,
    )


def _reference(reference, config: OpticalConfig) -> np.ndarray:
    if reference is None:
        return np.zeros(config.shape, dtype=np.complex128)
    if isinstance(reference, PlaneWave):
        xs, ys = _hologram_coords(config)
        k = config.wavenumber
        phase = k * (xs[None, :] * math.sin(reference.angle_x) + ys[:, None] * math.sin(reference.angle_y))
        return reference.amplitude * np.exp(1j * phase)
    ref = np.asarray(reference, dtype=np.complex128)
    if ref.shape != config.shape:
        raise ValueError(f"reference shape {ref.shape} != hologram grid {config.shape}")
    return ref


def pointsource_hologram(cloud: PointCloud, config: OpticalConfig, reference=None, seed: int = 0,
                         phases=None) -> np.ndarray:
    """Interference intensity ``|mu + R|^2`` of the point-source object wave and a reference.

    Random point phases come from ``seed`` unless ``phases`` is given.
    """
    if phases is None:
        phases = np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi, size=len(cloud))
    mu = pointsource_field(cloud, config, phases)
    return np.abs(mu + _reference(reference, config)) ** 2
