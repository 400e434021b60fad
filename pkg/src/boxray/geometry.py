"""Rays, grids and acquisition geometries.

A ray is the line ``{t * dir + offset * normal}`` with ``dir = (cos, sin)`` and
``normal = (sin, -cos)``. Grids have unit step; physical lengths are scaled
into grid units before rays are built.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class Ray:
    theta: float
    offset: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.offset)):
            raise ValueError("ray parameters must be finite")

    @property
    def dir(self) -> np.ndarray:
        return np.array([math.cos(self.theta), math.sin(self.theta)])

    @property
    def normal(self) -> np.ndarray:
        return np.array([math.sin(self.theta), -math.cos(self.theta)])

    def point(self, t: float) -> np.ndarray:
        return t * self.dir + self.offset * self.normal

    @classmethod
    def through(cls, a, b) -> Ray:
        """The ray from point ``a`` towards point ``b``."""
        a = np.asarray(a, dtype=np.float64)
        d = np.asarray(b, dtype=np.float64) - a
        if not np.all(np.isfinite(d)) or not np.any(d):
            raise ValueError("need two distinct finite points")
        theta = math.atan2(d[1], d[0])
        return cls(theta, float(a[0] * math.sin(theta) - a[1] * math.cos(theta)))


def ray_from_angle_offset(theta: float, y: float) -> Ray:
    return Ray(float(theta), float(y))


class Orientation(enum.Enum):
    MAINLY_VERTICAL = "vertical"
    MAINLY_HORIZONTAL = "horizontal"


def is_mainly_vertical(theta: float) -> bool:
    return abs(math.sin(theta)) > math.sqrt(0.5)


def classify(ray: Ray) -> Orientation:
    if is_mainly_vertical(ray.theta):
        return Orientation.MAINLY_VERTICAL
    return Orientation.MAINLY_HORIZONTAL


@dataclass(frozen=True)
class GridSpec:
    """``n x n`` unit cells; cell ``(p, q)`` spans ``origin + [p, p+1] x [q, q+1]``."""

    n: int
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("grid size must be a positive integer")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def centered(cls, n: int) -> GridSpec:
        return cls(n, (-0.5 * n, -0.5 * n))

    @property
    def center(self) -> np.ndarray:
        return np.array(self.origin) + 0.5 * self.n

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def cell_center(self, p: int, q: int) -> np.ndarray:
        return np.array([self.origin[0] + p + 0.5, self.origin[1] + q + 0.5])

    def local_offsets(self, thetas: np.ndarray, offsets: np.ndarray) -> np.ndarray:
        """Ray offsets measured from the grid corner instead of the world origin."""
        ox, oy = self.origin
        return offsets - (ox * np.sin(thetas) - oy * np.cos(thetas))


def clip_to_box(ray: Ray, lo, hi) -> tuple[float, float] | None:
    """Parameter interval of ``ray`` inside the box ``[lo, hi]``, or None.

    Rays running along a face, or only touching a corner, are misses.
    """
    p0 = ray.offset * ray.normal
    d = ray.dir
    t0, t1 = -math.inf, math.inf
    for axis in range(2):
        if abs(d[axis]) < 1e-15:
            if not lo[axis] < p0[axis] < hi[axis]:
                return None
            continue
        a = (lo[axis] - p0[axis]) / d[axis]
        b = (hi[axis] - p0[axis]) / d[axis]
        t0, t1 = max(t0, min(a, b)), min(t1, max(a, b))
    if t1 - t0 <= 1e-12:
        return None
    return t0, t1


def entry_point(ray: Ray, grid: GridSpec) -> np.ndarray | None:
    lo = np.array(grid.origin)
    span = clip_to_box(ray, lo, lo + grid.n)
    if span is None:
        return None
    x0 = ray.point(span[0])
    # land exactly on the face that was hit
    for axis in range(2):
        for face in (lo[axis], lo[axis] + grid.n):
            if abs(x0[axis] - face) <= BOUNDARY_TOL:
                x0[axis] = face
    return x0


def chord_length(ray: Ray, grid: GridSpec) -> float:
    lo = np.array(grid.origin)
    span = clip_to_box(ray, lo, lo + grid.n)
    return 0.0 if span is None else span[1] - span[0]


@dataclass(frozen=True, eq=False)
class RaySet:
    """An ordered collection of rays stored as parallel angle/offset arrays."""

    thetas: np.ndarray
    offsets: np.ndarray
    metadata: str = "arbitrary"

    def __post_init__(self):
        th = np.array(self.thetas, dtype=np.float64).ravel()
        off = np.array(self.offsets, dtype=np.float64).ravel()
        if th.shape != off.shape:
            raise ValueError("thetas and offsets must have the same length")
        if not (np.all(np.isfinite(th)) and np.all(np.isfinite(off))):
            raise ValueError("ray parameters must be finite")
        th.flags.writeable = False
        off.flags.writeable = False
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "offsets", off)

    @classmethod
    def from_rays(cls, rays, metadata: str = "arbitrary") -> RaySet:
        rays = list(rays)
        return cls([r.theta for r in rays], [r.offset for r in rays], metadata)

    def __len__(self) -> int:
        return self.thetas.size

    def __getitem__(self, m: int) -> Ray:
        return Ray(float(self.thetas[m]), float(self.offsets[m]))

    def __iter__(self):
        return (self[m] for m in range(len(self)))

    @cached_property
    def rays(self) -> tuple[Ray, ...]:
        return tuple(self)


def parallel_rayset(n_angles: int, n_offsets: int, grid: GridSpec) -> RaySet:
    """Angles ``i*pi/n_angles``; offsets spread over the grid width around its center."""
    if n_angles < 1 or n_offsets < 1:
        raise ValueError("need at least one angle and one offset")
    thetas = np.arange(n_angles) * (np.pi / n_angles)
    u = (np.arange(n_offsets) - 0.5 * (n_offsets - 1)) * (grid.n / n_offsets)
    cx, cy = grid.center
    center_off = cx * np.sin(thetas) - cy * np.cos(thetas)
    offsets = center_off[:, None] + u[None, :]
    return RaySet(
        np.repeat(thetas, n_offsets),
        offsets.ravel(),
        f"parallel angles={n_angles} offsets={n_offsets}",
    )


def random_rayset(n_rays: int, grid: GridSpec, seed: int = 0) -> RaySet:
    """Uniform random directions; offsets uniform over the same width as
    :func:`parallel_rayset`, so both geometries see the same chord lengths."""
    rng = np.random.default_rng(seed)
    thetas = rng.uniform(0.0, 2.0 * np.pi, n_rays)
    cx, cy = grid.center
    half = 0.5 * grid.n
    offsets = cx * np.sin(thetas) - cy * np.cos(thetas) + rng.uniform(-half, half, n_rays)
    return RaySet(thetas, offsets, f"random rays={n_rays} seed={seed}")


@dataclass(frozen=True)
class FanBeamConfig:
    """Flat-detector fan beam rotating about the grid center.

    Lengths are physical. ``voxel_size`` is the physical size of one grid
    cell; when omitted the magnified detector width spans the grid.
    ``cor_shift`` displaces the source-detector pair orthogonally to its axis
    relative to the rotation center; unlike the other lengths it is given in
    grid units, so the central ray passes the center at that offset.
    """

    source_to_detector: float
    source_to_object: float
    detector_pitch: float
    n_detectors: int
    angles: tuple[float, ...] = field(default=())
    cor_shift: float = 0.0
    voxel_size: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if not self.source_to_detector > self.source_to_object > 0:
            raise ValueError("need source_to_detector > source_to_object > 0")
        if not self.detector_pitch > 0:
            raise ValueError("detector pitch must be positive")
        if self.n_detectors < 1 or not self.angles:
            raise ValueError("need at least one detector and one angle")
        if self.voxel_size is not None and not self.voxel_size > 0:
            raise ValueError("voxel size must be positive")
        if not all(math.isfinite(a) for a in self.angles) or not math.isfinite(self.cor_shift):
            raise ValueError("angles and shift must be finite")

    @property
    def magnification(self) -> float:
        return self.source_to_detector / self.source_to_object

    def cell_size(self, grid: GridSpec) -> float:
        if self.voxel_size is not None:
            return self.voxel_size
        return self.n_detectors * self.detector_pitch / self.magnification / grid.n

    def with_shift(self, shift: float) -> FanBeamConfig:
        return FanBeamConfig(
            self.source_to_detector, self.source_to_object, self.detector_pitch,
            self.n_detectors, self.angles, shift, self.voxel_size,
        )


def fanbeam_rayset(config: FanBeamConfig, grid: GridSpec) -> RaySet:
    """One ray per (angle, detector) pair, angle-major, in grid units."""
    scale = 1.0 / config.cell_size(grid)
    beta = np.asarray(config.angles)[:, None]
    u = (np.arange(config.n_detectors) - 0.5 * (config.n_detectors - 1)) * config.detector_pitch
    s = config.cor_shift / scale
    # source and detector positions along the central axis and the detector line
    src_axial = -config.source_to_object
    src_lateral = s
    det_axial = config.source_to_detector - config.source_to_object
    det_lateral = u[None, :] + s
    axial = det_axial - src_axial
    lateral = det_lateral - src_lateral
    # ray angle relative to the central axis, measured towards -e_u
    phi = np.arctan2(-lateral, axial)
    thetas = beta + phi
    # offset of the source point along the ray normal, taken about the rotation center
    cb, sb = np.cos(beta), np.sin(beta)
    sx = src_axial * cb + src_lateral * sb
    sy = src_axial * sb - src_lateral * cb
    offsets = (sx * np.sin(thetas) - sy * np.cos(thetas)) * scale
    cx, cy = grid.center
    offsets = offsets + cx * np.sin(thetas) - cy * np.cos(thetas)
    return RaySet(
        np.broadcast_to(thetas, offsets.shape).ravel(),
        offsets.ravel(),
        f"fanbeam angles={len(config.angles)} detectors={config.n_detectors} cor={config.cor_shift!r}",
    )
