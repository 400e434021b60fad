"""Ray traversal and the per-ray projection with overlapping bases.

Each ray is walked cell by cell through the grid, padded by a margin wide
enough that every basis whose support meets the ray lies within ``K`` cells
(horizontally for mainly vertical rays, vertically otherwise) of a crossed
cell. Crossed cells are grouped by row (column): each row evaluates the
contiguous range ``[p_min - K, p_max + K]`` once, which is what the classic
left/right skip tests produce for ``K = 1``.

All kernels work in grid-local coordinates, where cell ``(p, q)`` is
``[p, p+1] x [q, q+1]``; coefficient arrays are indexed ``data[q, p]``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange

from .geometry import GridSpec, Ray, is_mainly_vertical
from .profiles import (
    PROFILE_BUFFER_SIZE,
    Generator,
    _build_profile,
    _eval_profile,
    eval_profile,
    neighbor_count,
    project_generator,
    trace_margin,
)

MODE_FORWARD = 0
MODE_ADJOINT = 1
MODE_COUNT = 2

# rays per work chunk; chunking is independent of the worker count so that
# the adjoint reduction order never changes
CHUNK_RAYS = 256
MAX_CHUNKS = 32

_SQRT_HALF = math.sqrt(0.5)


def configure_workers() -> int:
    """Apply ``BOXRAY_WORKERS`` (default: all available) to the numba pool."""
    value = os.environ.get("BOXRAY_WORKERS")
    if value:
        numba.set_num_threads(max(1, min(int(value), numba.config.NUMBA_NUM_THREADS)))
    return numba.get_num_threads()


@njit(cache=True)
def _walk(theta, y, lo, hi, seg):
    """Cells crossed by the ray inside ``[lo, hi]^2``.

    Row ``k`` of ``seg`` holds ``x_enter, y_enter, x_exit, y_exit, p, q``.
    Crossing coordinates land exactly on the lattice line they cross.
    """
    c = math.cos(theta)
    s = math.sin(theta)
    px = y * s
    py = -y * c
    t0 = -math.inf
    t1 = math.inf
    if abs(c) < 1e-15:
        if not (lo < px < hi):
            return 0
    else:
        a = (lo - px) / c
        b = (hi - px) / c
        t0 = max(t0, min(a, b))
        t1 = min(t1, max(a, b))
    if abs(s) < 1e-15:
        if not (lo < py < hi):
            return 0
    else:
        a = (lo - py) / s
        b = (hi - py) / s
        t0 = max(t0, min(a, b))
        t1 = min(t1, max(a, b))
    if not (t1 - t0 > 1e-12):
        return 0

    xc = px + t0 * c
    yc = py + t0 * s
    xe = px + t1 * c
    ye = py + t1 * s
    # snap entry and exit onto the faces they lie on
    for f in (lo, hi):
        tol = 1e-12 * (1.0 + abs(f))
        if abs(xc - f) <= tol:
            xc = f
        if abs(yc - f) <= tol:
            yc = f
        if abs(xe - f) <= tol:
            xe = f
        if abs(ye - f) <= tol:
            ye = f

    sx = 0
    kx = 0.0
    tx = math.inf
    if c > 1e-15:
        sx = 1
        kx = math.floor(xc) + 1.0
        tx = (kx - px) / c
    elif c < -1e-15:
        sx = -1
        kx = math.ceil(xc) - 1.0
        tx = (kx - px) / c
    sy = 0
    ky = 0.0
    ty = math.inf
    if s > 1e-15:
        sy = 1
        ky = math.floor(yc) + 1.0
        ty = (ky - py) / s
    elif s < -1e-15:
        sy = -1
        ky = math.ceil(yc) - 1.0
        ty = (ky - py) / s

    t = t0
    k = 0
    while t < t1:
        tn = min(tx, ty, t1)
        # crossings this close are one lattice corner
        eps = 1e-13 * (1.0 + abs(tn))
        hit_x = tx <= tn + eps
        hit_y = ty <= tn + eps
        if tn >= t1 - eps:
            tn = t1
            xn = xe
            yn = ye
        else:
            xn = kx if hit_x else px + tn * c
            yn = ky if hit_y else py + tn * s
        if xn != xc or yn != yc:
            seg[k, 0] = xc
            seg[k, 1] = yc
            seg[k, 2] = xn
            seg[k, 3] = yn
            seg[k, 4] = math.floor(0.5 * (xc + xn))
            seg[k, 5] = math.floor(0.5 * (yc + yn))
            k += 1
        if hit_x:
            kx += sx
            tx = (kx - px) / c
        if hit_y:
            ky += sy
            ty = (ky - py) / s
        t = tn
        xc = xn
        yc = yn
    return k


@njit(cache=True)
def _flush(major, lo_m, hi_m, vertical, n, K, theta_s, theta_c, y, buf, data, mode, value, acc):
    # evaluate one row (vertical rays) or column of the contiguous range
    if major < 0 or major >= n:
        return 0.0
    total = 0.0
    first = max(lo_m - K, 0)
    last = min(hi_m + K, n - 1)
    for minor in range(first, last + 1):
        if vertical:
            p = minor
            q = major
        else:
            p = major
            q = minor
        yk = y - (theta_s * (p + 0.5) - theta_c * (q + 0.5))
        w = _eval_profile(buf, yk)
        if mode == 0:
            total += data[q, p] * w
        elif mode == 1:
            acc[q, p] += value * w
        else:
            acc[q, p] += 1.0
    return total


@njit(cache=True)
def _ray_kernel(theta, y, n, K, margin, buf, seg, data, mode, value, acc):
    """Project (mode 0), back-project (1) or count evaluations (2) for one ray."""
    nseg = _walk(theta, y, -float(margin), float(n + margin), seg)
    if nseg == 0:
        return 0.0
    s = math.sin(theta)
    c = math.cos(theta)
    vertical = abs(s) > 0.7071067811865476
    total = 0.0
    cur = -(1 << 30)
    lo_m = 0
    hi_m = 0
    for k in range(nseg):
        p = int(seg[k, 4])
        q = int(seg[k, 5])
        if vertical:
            major = q
            minor = p
        else:
            major = p
            minor = q
        if major != cur:
            if k > 0:
                total += _flush(cur, lo_m, hi_m, vertical, n, K, s, c, y, buf, data, mode, value, acc)
            cur = major
            lo_m = minor
            hi_m = minor
        else:
            lo_m = min(lo_m, minor)
            hi_m = max(hi_m, minor)
    total += _flush(cur, lo_m, hi_m, vertical, n, K, s, c, y, buf, data, mode, value, acc)
    return total


def _seg_rows(n: int, margin: int) -> int:
    return 2 * (n + 2 * margin) + 4


@njit(cache=True, parallel=True)
def _project_many(thetas, offsets, data, dirs, K, margin, chunk, out):
    n = data.shape[0]
    m_total = thetas.size
    nchunks = (m_total + chunk - 1) // chunk
    dummy = np.zeros((1, 1))
    for ci in prange(nchunks):
        buf = np.empty(PROFILE_BUFFER_SIZE)
        seg = np.empty((2 * (n + 2 * margin) + 4, 6))
        for m in range(ci * chunk, min((ci + 1) * chunk, m_total)):
            _build_profile(thetas[m], dirs, buf)
            out[m] = _ray_kernel(thetas[m], offsets[m], n, K, margin, buf, seg, data, 0, 0.0, dummy)


@njit(cache=True, parallel=True)
def _backproject_many(thetas, offsets, values, n, dirs, K, margin, chunk, nchunks, out):
    m_total = thetas.size
    private = np.zeros((nchunks, n, n))
    dummy = np.zeros((1, 1))
    for ci in prange(nchunks):
        buf = np.empty(PROFILE_BUFFER_SIZE)
        seg = np.empty((2 * (n + 2 * margin) + 4, 6))
        acc = private[ci]
        for m in range(ci * chunk, min((ci + 1) * chunk, m_total)):
            if values[m] != 0.0:
                _build_profile(thetas[m], dirs, buf)
                _ray_kernel(thetas[m], offsets[m], n, K, margin, buf, seg, dummy, 1, values[m], acc)
    # fixed-order merge keeps the result independent of scheduling
    for ci in range(nchunks):
        out += private[ci]


def project_rays(data: np.ndarray, thetas, offsets, gen: Generator) -> np.ndarray:
    """Line integrals for rays given by grid-local offsets."""
    data = np.ascontiguousarray(data, dtype=np.float64)
    thetas = np.ascontiguousarray(thetas, dtype=np.float64)
    offsets = np.ascontiguousarray(offsets, dtype=np.float64)
    out = np.zeros(thetas.size)
    if thetas.size:
        _project_many(thetas, offsets, data, gen.directions_array, neighbor_count(gen),
                      trace_margin(gen), CHUNK_RAYS, out)
    return out


def backproject_rays(values, thetas, offsets, gen: Generator, n: int) -> np.ndarray:
    """Adjoint of :func:`project_rays`, reduced deterministically."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    thetas = np.ascontiguousarray(thetas, dtype=np.float64)
    offsets = np.ascontiguousarray(offsets, dtype=np.float64)
    out = np.zeros((n, n))
    m = thetas.size
    if m:
        nchunks = min(MAX_CHUNKS, -(-m // CHUNK_RAYS))
        chunk = -(-m // nchunks)
        _backproject_many(thetas, offsets, values, n, gen.directions_array, neighbor_count(gen),
                          trace_margin(gen), chunk, nchunks, out)
    return out


# ---------------------------------------------------------------------------
# Single-ray interface
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraversalStep:
    x_enter: np.ndarray
    x_exit: np.ndarray
    cell: tuple[int, int]

    @property
    def length(self) -> float:
        return float(np.hypot(*(self.x_exit - self.x_enter)))


def _as_array(coeffs) -> np.ndarray:
    data = getattr(coeffs, "data", coeffs)
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise ValueError("coefficients must be a square 2D array")
    return data


def _grid_for(data: np.ndarray, grid: GridSpec | None) -> GridSpec:
    if grid is None:
        return GridSpec(data.shape[0])
    if grid.n != data.shape[0]:
        raise ValueError("coefficient shape does not match the grid")
    return grid


def _local_offset(ray: Ray, grid: GridSpec) -> float:
    ox, oy = grid.origin
    return ray.offset - (ox * math.sin(ray.theta) - oy * math.cos(ray.theta))


def trace_cells(ray: Ray, grid: GridSpec, margin: int = 0, local: bool = False) -> list[TraversalStep]:
    """Cells crossed by ``ray`` in traversal order (grid padded by ``margin``).

    Points are in world coordinates unless ``local`` is set.
    """
    seg = np.empty((_seg_rows(grid.n, margin), 6))
    k = _walk(ray.theta, _local_offset(ray, grid), -float(margin), float(grid.n + margin), seg)
    origin = np.zeros(2) if local else np.array(grid.origin)
    return [
        TraversalStep(seg[i, 0:2] + origin, seg[i, 2:4] + origin, (int(seg[i, 4]), int(seg[i, 5])))
        for i in range(k)
    ]


def basis_contribution(coeffs, x_k, theta: float, cell: tuple[int, int], gen: Generator,
                       profile=None) -> float:
    """``c[p, q] * phi_theta(<o - x_k, theta_perp>)`` with ``o`` the cell center.

    ``x_k`` is in grid-local coordinates. Cells outside the grid give 0.
    """
    data = _as_array(coeffs)
    p, q = cell
    n = data.shape[0]
    if not (0 <= p < n and 0 <= q < n):
        return 0.0
    s, c = math.sin(theta), math.cos(theta)
    yk = (p + 0.5 - x_k[0]) * s - (q + 0.5 - x_k[1]) * c
    if profile is None:
        profile = project_generator(gen, theta)
    return float(data[q, p] * eval_profile(profile, yk))


def _single(ray: Ray, gen: Generator, grid: GridSpec, data, mode, value, acc):
    buf = np.empty(PROFILE_BUFFER_SIZE)
    _build_profile(float(ray.theta), gen.directions_array, buf)
    margin = trace_margin(gen)
    seg = np.empty((_seg_rows(grid.n, margin), 6))
    return _ray_kernel(float(ray.theta), _local_offset(ray, grid), grid.n, neighbor_count(gen),
                       margin, buf, seg, data, mode, value, acc)


def forward_ray(coeffs, ray: Ray, gen: Generator, grid: GridSpec | None = None) -> float:
    data = _as_array(coeffs)
    grid = _grid_for(data, grid)
    return float(_single(ray, gen, grid, np.ascontiguousarray(data), MODE_FORWARD, 0.0, np.zeros((1, 1))))


def backproject_ray(accumulator: np.ndarray, ray: Ray, value: float, gen: Generator,
                    grid: GridSpec | None = None) -> np.ndarray:
    """Add ``value`` times the forward weights of ``ray`` into ``accumulator`` in place."""
    acc = getattr(accumulator, "data", accumulator)
    grid = _grid_for(acc, grid)
    if value != 0.0:
        _single(ray, gen, grid, np.zeros((1, 1)), MODE_ADJOINT, float(value), acc)
    return accumulator


def evaluation_counts(ray: Ray, gen: Generator, grid: GridSpec) -> np.ndarray:
    """How many times each basis is evaluated while projecting ``ray``."""
    counts = np.zeros(grid.shape)
    _single(ray, gen, grid, np.zeros((1, 1)), MODE_COUNT, 0.0, counts)
    return counts.astype(np.int64)


# ---------------------------------------------------------------------------
# Reference implementations used for validation
# ---------------------------------------------------------------------------


def brute_force_ray(coeffs, ray: Ray, gen: Generator, grid: GridSpec | None = None) -> float:
    """Sum of the contributions of every basis in the grid."""
    data = _as_array(coeffs)
    grid = _grid_for(data, grid)
    n = grid.n
    s, c = math.sin(ray.theta), math.cos(ray.theta)
    q, p = np.mgrid[0:n, 0:n]
    yk = _local_offset(ray, grid) - (s * (p + 0.5) - c * (q + 0.5))
    weights = eval_profile(project_generator(gen, ray.theta), yk)
    return float(np.sum(data * weights))


def skip_rule_ray(coeffs, ray: Ray, gen: Generator, grid: GridSpec | None = None) -> float:
    """Per-step evaluation with immediate neighbors and the four skip tests.

    Only valid for generators needing at most one neighbor.
    """
    data = _as_array(coeffs)
    grid = _grid_for(data, grid)
    K = neighbor_count(gen)
    if K > 1:
        raise ValueError("skip rules only cover one neighbor on each side")
    profile = project_generator(gen, ray.theta)
    axis = 0 if is_mainly_vertical(ray.theta) else 1
    total = 0.0
    for step in trace_cells(ray, grid, trace_margin(gen), local=True):
        xk, xn = step.x_enter, step.x_exit
        p, q = step.cell
        total += basis_contribution(data, xk, ray.theta, (p, q), gen, profile)
        if K == 0:
            continue
        idx = step.cell[axis]
        before = (p - 1, q) if axis == 0 else (p, q - 1)
        after = (p + 1, q) if axis == 0 else (p, q + 1)
        if xn[axis] != idx and xk[axis] != idx:
            total += basis_contribution(data, xk, ray.theta, before, gen, profile)
        if xn[axis] != idx + 1 and xk[axis] != idx + 1:
            total += basis_contribution(data, xk, ray.theta, after, gen, profile)
    return total
