"""Least-squares reconstruction, resampling, phantoms, metrics and calibration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from skimage.metrics import structural_similarity

from .geometry import FanBeamConfig, GridSpec, RaySet, fanbeam_rayset
from .profiles import Generator, eval_generator_2d, support_radius
from .xray_ops import CoefficientGrid, Sinogram, XRayOperator


class NumericalError(RuntimeError):
    def __init__(self, message: str, iteration: int):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


ROUNDOFF_TOL = 1e-13


@dataclass(frozen=True)
class SolverConfig:
    """Conjugate gradients on ``(H^T H + lam I) c = H^T p``.

    ``tol`` stops early once the normal residual falls below ``tol`` times
    its initial value; 0 runs the full iteration count unless the residual
    reaches round-off level first (``ROUNDOFF_TOL``), past which further
    steps only amplify noise.
    """

    iterations: int = 30
    lam: float = 0.0
    tol: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if not self.lam >= 0.0:
            raise ValueError("lam must be non-negative")
        if not self.tol >= 0.0:
            raise ValueError("tol must be non-negative")


@dataclass
class SolveResult:
    coeffs: CoefficientGrid
    normal_residuals: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    iterations: int = 0


def cgls(op: XRayOperator, p: np.ndarray, cfg: SolverConfig) -> SolveResult:
    """CG on the normal equations in the least-squares form (CGLS)."""
    # overflow is reported as NumericalError below, not as a warning
    with np.errstate(over="ignore", invalid="ignore"):
        return _cgls(op, p, cfg)


def _cgls(op: XRayOperator, p: np.ndarray, cfg: SolverConfig) -> SolveResult:
    n = op.grid.n
    lam = cfg.lam
    x = np.zeros((n, n))
    r = np.array(p, dtype=np.float64)
    s = op.apply_adjoint(r)
    d = s.copy()
    gamma = float(np.sum(s * s))
    result = SolveResult(CoefficientGrid(op.grid, x))
    result.normal_residuals.append(math.sqrt(gamma))
    result.residuals.append(float(np.linalg.norm(r)))
    if not math.isfinite(gamma):
        raise NumericalError("non-finite normal residual", 0)
    stop = max(cfg.tol, ROUNDOFF_TOL) * math.sqrt(gamma)
    for it in range(1, cfg.iterations + 1):
        if gamma == 0.0 or math.sqrt(gamma) <= stop:
            break
        q = op.apply(d)
        delta = float(q @ q) + lam * float(np.sum(d * d))
        if not math.isfinite(delta) or delta <= 0.0:
            raise NumericalError("breakdown in the step length", it)
        alpha = gamma / delta
        x += alpha * d
        r -= alpha * q
        s = op.apply_adjoint(r) - lam * x
        gamma_new = float(np.sum(s * s))
        if not math.isfinite(gamma_new):
            raise NumericalError("non-finite normal residual", it)
        d = s + (gamma_new / gamma) * d
        gamma = gamma_new
        result.normal_residuals.append(math.sqrt(gamma))
        result.residuals.append(float(np.linalg.norm(r)))
        result.iterations = it
    result.coeffs = CoefficientGrid(op.grid, x)
    return result


def cg_solve(rayset: RaySet, gen: Generator, sino: Sinogram, grid: GridSpec,
             cfg: SolverConfig = SolverConfig()) -> CoefficientGrid:
    if len(sino.values) != len(rayset):
        raise ValueError("sinogram does not match the ray set")
    return cgls(XRayOperator(grid, rayset, gen), sino.values, cfg).coeffs


# ---------------------------------------------------------------------------
# Resampling
# ---------------------------------------------------------------------------


def _kernel(gen: Generator, phase_x: float, phase_y: float, reach: int) -> np.ndarray:
    # kern[b + reach, a + reach] = phi(a + phase_x, b + phase_y)
    ks = np.arange(-reach, reach + 1)
    return np.array([[eval_generator_2d(gen, (a + phase_x, b + phase_y)) for a in ks] for b in ks])


def resample(coeffs: CoefficientGrid, gen: Generator, factor: int) -> np.ndarray:
    """Evaluate the expansion at ``factor`` points per cell side.

    Sample ``(j, i)`` of the output sits at grid-local position
    ``((i + 0.5) / factor, (j + 0.5) / factor)``.
    """
    if factor < 1:
        raise ValueError("factor must be at least 1")
    c = coeffs.data
    n = c.shape[0]
    reach = math.ceil(support_radius(gen)) + 1
    padded = np.pad(c, reach)
    out = np.zeros((n * factor, n * factor))
    for j in range(factor):
        for i in range(factor):
            kern = _kernel(gen, (i + 0.5) / factor - 0.5, (j + 0.5) / factor - 0.5, reach)
            acc = np.zeros((n, n))
            # image(p) = sum_d c[p - d] * kern[d]
            for b in range(-reach, reach + 1):
                for a in range(-reach, reach + 1):
                    w = kern[b + reach, a + reach]
                    if w != 0.0:
                        acc += w * padded[reach - b:reach - b + n, reach - a:reach - a + n]
            out[j::factor, i::factor] = acc
    return out


# ---------------------------------------------------------------------------
# Analytic phantoms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ellipse:
    center: tuple[float, float]
    axes: tuple[float, float]
    rotation: float = 0.0
    density: float = 1.0

    def __post_init__(self):
        if not (self.axes[0] > 0 and self.axes[1] > 0):
            raise ValueError("ellipse semi-axes must be positive")

    def contains(self, x, y) -> np.ndarray:
        cr, sr = math.cos(self.rotation), math.sin(self.rotation)
        dx = np.asarray(x) - self.center[0]
        dy = np.asarray(y) - self.center[1]
        u = cr * dx + sr * dy
        v = -sr * dx + cr * dy
        return (u / self.axes[0]) ** 2 + (v / self.axes[1]) ** 2 <= 1.0


# modified Shepp-Logan: (density, a, b, x0, y0, rotation in degrees) on [-1, 1]^2
_SHEPP_LOGAN = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
)


# inner skull ellipse giving a ring about 0.1 half-widths thick
_THICK_INNER = (0.59, 0.82)


def shepp_logan(grid: GridSpec, fill: float = 0.95, thick: bool = False) -> list[Ellipse]:
    """Modified Shepp-Logan ellipses scaled to ``fill`` times the grid half-width.

    With ``thick`` the outer ring is widened so that it stays several cells
    wide on coarse grids (about 3 cells at ``n = 64``).
    """
    table = list(_SHEPP_LOGAN)
    if thick:
        rho, _, _, x0, y0, rot = table[1]
        table[1] = (rho, *_THICK_INNER, x0, y0, rot)
    cx, cy = grid.center
    r = 0.5 * grid.n * fill
    return [
        Ellipse((cx + x0 * r, cy + y0 * r), (a * r, b * r), math.radians(rot), rho)
        for rho, a, b, x0, y0, rot in table
    ]


def disk(center, radius: float, density: float = 1.0) -> Ellipse:
    return Ellipse((float(center[0]), float(center[1])), (radius, radius), 0.0, density)


def ellipse_chords(ellipse: Ellipse, thetas: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Chord lengths of the rays through ``ellipse``."""
    dx, dy = np.cos(thetas), np.sin(thetas)
    nx, ny = np.sin(thetas), -np.cos(thetas)
    # closest point of each ray to the center, relative to it
    rel = offsets - (ellipse.center[0] * nx + ellipse.center[1] * ny)
    qx, qy = rel * nx, rel * ny
    cr, sr = math.cos(ellipse.rotation), math.sin(ellipse.rotation)
    a, b = ellipse.axes
    du, dv = (cr * dx + sr * dy) / a, (-sr * dx + cr * dy) / b
    qu, qv = (cr * qx + sr * qy) / a, (-sr * qx + cr * qy) / b
    A = du * du + dv * dv
    B = 2.0 * (du * qu + dv * qv)
    C = qu * qu + qv * qv - 1.0
    disc = B * B - 4.0 * A * C
    return np.where(disc > 0.0, np.sqrt(np.maximum(disc, 0.0)) / A, 0.0)


def ellipse_sinogram(ellipses, rayset: RaySet) -> Sinogram:
    values = np.zeros(len(rayset))
    for e in ellipses:
        values += e.density * ellipse_chords(e, rayset.thetas, rayset.offsets)
    return Sinogram(rayset, values)


def rasterize(ellipses, grid: GridSpec, factor: int = 1, supersample: int = 4) -> np.ndarray:
    """Area-averaged phantom on the ``factor``-refined grid (``[row, col]`` = ``[y, x]``)."""
    m = grid.n * factor
    sub = (np.arange(m * supersample) + 0.5) / (factor * supersample)
    xs = grid.origin[0] + sub
    ys = grid.origin[1] + sub
    X, Y = np.meshgrid(xs, ys)
    img = np.zeros_like(X)
    for e in ellipses:
        img += e.density * e.contains(X, Y)
    return img.reshape(m, supersample, m, supersample).mean(axis=(1, 3))


# ---------------------------------------------------------------------------
# Noise and metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseSpec:
    variance: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if not self.variance >= 0.0:
            raise ValueError("noise variance must be non-negative")


def add_noise(sino: Sinogram, spec: NoiseSpec) -> Sinogram:
    if spec.variance == 0.0:
        return sino
    rng = np.random.default_rng(spec.seed)
    return sino.with_values(sino.values + rng.normal(0.0, math.sqrt(spec.variance), sino.values.shape))


def _check_shapes(x, ref):
    x = np.asarray(x, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if x.shape != ref.shape:
        raise ValueError("images must have the same shape")
    return x, ref


def psnr(x, ref, peak: float | None = None) -> float:
    """PSNR in dB; ``peak`` defaults to the reference maximum. Identical images give inf."""
    x, ref = _check_shapes(x, ref)
    peak = float(ref.max()) if peak is None else float(peak)
    mse = float(np.mean((x - ref) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def ssim(x, ref, peak: float | None = None) -> float:
    """Gaussian-window SSIM (sigma 1.5, 11 taps, K1 = 0.01, K2 = 0.03)."""
    x, ref = _check_shapes(x, ref)
    peak = float(ref.max()) if peak is None else float(peak)
    return float(structural_similarity(
        x, ref, data_range=peak, gaussian_weights=True, sigma=1.5,
        use_sample_covariance=False, K1=0.01, K2=0.03,
    ))


@dataclass
class Quality:
    psnr: float
    ssim: float
    image: np.ndarray
    coeffs: CoefficientGrid


def reconstruction_quality(gen: Generator, grid: GridSpec, ellipses, sino: Sinogram,
                           cfg: SolverConfig = SolverConfig(), factor: int = 4,
                           supersample: int = 4) -> Quality:
    """Reconstruct ``sino``, resample by ``factor`` and score against the phantom raster."""
    coeffs = cgls(XRayOperator(grid, sino.rayset, gen), sino.values, cfg).coeffs
    image = resample(coeffs, gen, factor)
    truth = rasterize(ellipses, grid, factor, supersample)
    return Quality(psnr(image, truth), ssim(image, truth), image, coeffs)


# ---------------------------------------------------------------------------
# Center-of-rotation calibration
# ---------------------------------------------------------------------------


def search_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Candidates ``start, start + step, ...`` up to ``stop`` inclusive."""
    if not step > 0:
        raise ValueError("search step must be positive")
    count = math.floor((stop - start) / step + 1e-9) + 1
    if count < 1:
        raise ValueError("empty search range")
    return np.round(start + step * np.arange(count), 12)


def cor_residuals(sino: Sinogram, config: FanBeamConfig, grid: GridSpec, gen: Generator,
                  shifts, cfg: SolverConfig = SolverConfig(iterations=10)) -> np.ndarray:
    """Data-fit residual ``||p - H c*||`` after a short solve, per candidate shift."""
    out = np.empty(len(shifts))
    for i, shift in enumerate(shifts):
        rays = fanbeam_rayset(config.with_shift(float(shift)), grid)
        op = XRayOperator(grid, rays, gen)
        out[i] = cgls(op, sino.values, cfg).residuals[-1]
    return out


def calibrate_cor(sino: Sinogram, config: FanBeamConfig, grid: GridSpec, gen: Generator,
                  search: tuple[float, float, float],
                  cfg: SolverConfig = SolverConfig(iterations=10)) -> float:
    """Grid search of the shift minimizing the data-fit residual.

    Ties go to the candidate of smallest magnitude.
    """
    shifts = search_grid(*search)
    res = cor_residuals(sino, config, grid, gen, shifts, cfg)
    best = min(range(len(shifts)), key=lambda i: (res[i], abs(shifts[i])))
    return float(shifts[best])
