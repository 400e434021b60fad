"""Matrix-free forward and adjoint operators over whole ray sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .geometry import GridSpec, RaySet
from .profiles import Generator, eval_profile, project_generator
from .tracer import backproject_rays, project_rays


@dataclass(frozen=True, eq=False)
class CoefficientGrid:
    """Expansion coefficients ``data[q, p]`` on a grid."""

    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.shape != self.grid.shape:
            raise ValueError(f"coefficients of shape {data.shape} do not fit a {self.grid.n}-grid")
        if not np.all(np.isfinite(data)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "data", data)

    @classmethod
    def zeros(cls, grid: GridSpec) -> CoefficientGrid:
        return cls(grid, np.zeros(grid.shape))

    @property
    def n(self) -> int:
        return self.grid.n


@dataclass(frozen=True, eq=False)
class Sinogram:
    rayset: RaySet
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if values.size != len(self.rayset):
            raise ValueError("one value per ray is required")
        object.__setattr__(self, "values", values)

    def with_values(self, values) -> Sinogram:
        return Sinogram(self.rayset, values)


class XRayOperator:
    """``H`` mapping coefficients to line integrals along ``rayset``."""

    def __init__(self, grid: GridSpec, rayset: RaySet, gen: Generator):
        self.grid = grid
        self.rayset = rayset
        self.gen = gen
        self._thetas = np.ascontiguousarray(rayset.thetas)
        self._offsets = grid.local_offsets(rayset.thetas, rayset.offsets)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rayset), self.grid.n**2)

    def apply(self, data: np.ndarray) -> np.ndarray:
        data = np.asarray(data, dtype=np.float64)
        if data.size != self.grid.n**2:
            raise ValueError("coefficient array does not match the grid")
        return project_rays(data.reshape(self.grid.shape), self._thetas, self._offsets, self.gen)

    def apply_adjoint(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.size != len(self.rayset):
            raise ValueError("sinogram length does not match the ray set")
        return backproject_rays(values, self._thetas, self._offsets, self.gen, self.grid.n)

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(
            self.shape,
            matvec=lambda v: self.apply(v),
            rmatvec=lambda v: self.apply_adjoint(v).ravel(),
            dtype=np.float64,
        )


def forward(coeffs: CoefficientGrid, rayset: RaySet, gen: Generator) -> Sinogram:
    op = XRayOperator(coeffs.grid, rayset, gen)
    return Sinogram(rayset, op.apply(coeffs.data))


def adjoint(sino: Sinogram, grid: GridSpec, gen: Generator) -> CoefficientGrid:
    op = XRayOperator(grid, sino.rayset, gen)
    return CoefficientGrid(grid, op.apply_adjoint(sino.values))


def adjoint_dot_test(grid: GridSpec, rayset: RaySet, gen: Generator, trials: int = 5, seed: int = 0) -> float:
    """Largest normalized mismatch between ``<Hc, p>`` and ``<c, H^T p>``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    op = XRayOperator(grid, rayset, gen)
    worst = 0.0
    for _ in range(trials):
        c = rng.standard_normal(grid.shape)
        p = rng.standard_normal(len(rayset))
        hc = op.apply(c)
        htp = op.apply_adjoint(p)
        denom = np.linalg.norm(hc) * np.linalg.norm(p) + np.linalg.norm(c) * np.linalg.norm(htp)
        if denom == 0.0:
            continue
        worst = max(worst, abs(float(hc @ p) - float(np.sum(c * htp))) / denom)
    return worst


def dense_matrix(grid: GridSpec, rayset: RaySet, gen: Generator) -> np.ndarray:
    """Explicit ``H`` from the entry formula ``phi_theta(y - <k, theta_perp>)``.

    Column ``q * n + p`` belongs to the basis centered on cell ``(p, q)``.
    Meant for small validation problems only.
    """
    n = grid.n
    q, p = np.mgrid[0:n, 0:n]
    cx = grid.origin[0] + p.ravel() + 0.5
    cy = grid.origin[1] + q.ravel() + 0.5
    rows = np.empty((len(rayset), n * n))
    for m, ray in enumerate(rayset):
        s, c = np.sin(ray.theta), np.cos(ray.theta)
        rows[m] = eval_profile(project_generator(gen, ray.theta), ray.offset - (s * cx - c * cy))
    return rows
