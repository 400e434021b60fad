"""Basis generators and their exact projected profiles.

A generator is described by a list of directions ``u_d``; its Fourier
transform is the product of ``sinc(<xi, u_d> / 2pi)`` factors, i.e. the
generator is the convolution of the centered unit segments ``[-1/2, 1/2] u_d``.
Integrating it along the line ``t*theta + y*theta_perp`` gives a 1D function of
``y`` equal to the convolution of rectangles of widths ``|<theta_perp, u_d>|``,
each normalized to unit mass. That convolution is a truncated-power expansion
over the subset sums of the widths, which is what :func:`project_generator`
builds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numba import njit
from scipy import integrate

# Widths below this are treated as a Dirac factor.
DEGENERATE_TOL = 1e-9
# Subset sums closer than this are merged into a single knot.
KNOT_MERGE_TOL = 1e-12
# Fast paths defer to the engine below this value of a*b.
FAST_PATH_TOL = 1e-9
# Upper bound on the number of directions (tensor B-spline of degree 3).
MAX_DIRECTIONS = 8

_E1 = (1.0, 0.0)
_E2 = (0.0, 1.0)


@dataclass(frozen=True)
class Generator:
    """A box-spline generator given by its direction set.

    ``kind`` is one of ``"pixel"``, ``"box3"``, ``"box4"``, ``"bspline"`` or
    ``"generic"``; ``degree`` is only meaningful for ``"bspline"``.
    """

    kind: str
    directions: tuple[tuple[float, float], ...]
    degree: int | None = None

    def __post_init__(self):
        if len(self.directions) == 0:
            raise ValueError("a generator needs at least one direction")
        if len(self.directions) > MAX_DIRECTIONS:
            raise ValueError(f"at most {MAX_DIRECTIONS} directions are supported")
        for u in self.directions:
            if len(u) != 2 or not all(math.isfinite(v) for v in u):
                raise ValueError(f"invalid direction {u!r}")
            if u[0] == 0.0 and u[1] == 0.0:
                raise ValueError("zero direction vector")

    @classmethod
    def pixel(cls) -> Generator:
        return cls("pixel", (_E1, _E2))

    @classmethod
    def box3(cls) -> Generator:
        return cls("box3", (_E1, _E2, (1.0, 1.0)))

    @classmethod
    def box4(cls) -> Generator:
        return cls("box4", (_E1, _E2, (1.0, 1.0), (1.0, -1.0)))

    @classmethod
    def tensor_bspline(cls, degree: int) -> Generator:
        if degree < 0 or degree > 3:
            raise ValueError("tensor B-spline degree must be in 0..3")
        return cls("bspline", (_E1,) * (degree + 1) + (_E2,) * (degree + 1), degree)

    @classmethod
    def generic(cls, directions) -> Generator:
        dirs = tuple((float(u[0]), float(u[1])) for u in directions)
        return cls("generic", dirs)

    @classmethod
    def from_name(cls, name: str) -> Generator:
        """Parse ``pixel``, ``box3``, ``box4``, ``bspline<n>`` or ``bspline <n>``."""
        key = name.strip().lower().replace(" ", "")
        if key == "pixel":
            return cls.pixel()
        if key == "box3":
            return cls.box3()
        if key == "box4":
            return cls.box4()
        if key.startswith("bspline") and key[7:].isdigit():
            return cls.tensor_bspline(int(key[7:]))
        raise ValueError(f"unknown generator {name!r}")

    @property
    def name(self) -> str:
        if self.kind == "bspline":
            return f"bspline{self.degree}"
        return self.kind

    @property
    def directions_array(self) -> np.ndarray:
        return np.asarray(self.directions, dtype=np.float64).reshape(-1, 2)


# ---------------------------------------------------------------------------
# Compiled profile construction and evaluation (shared with the ray tracer)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _subset_expansion(widths, nd, knots, coefs):
    """Merged truncated-power knots/weights for the subset sums of ``widths``."""
    nsub = 1 << nd
    for mask in range(nsub):
        acc = 0.0
        sign = 1.0
        for d in range(nd):
            if mask & (1 << d):
                acc += widths[d]
                sign = -sign
        # insertion sort by knot value
        j = mask
        while j > 0 and knots[j - 1] > acc:
            knots[j] = knots[j - 1]
            coefs[j] = coefs[j - 1]
            j -= 1
        knots[j] = acc
        coefs[j] = sign
    nk = 0
    i = 0
    while i < nsub:
        k0 = knots[i]
        cf = coefs[i]
        i += 1
        while i < nsub and knots[i] - k0 <= KNOT_MERGE_TOL:
            cf += coefs[i]
            i += 1
        if cf != 0.0:
            knots[nk] = k0
            coefs[nk] = cf
            nk += 1
    return nk


@njit(cache=True)
def _factorial(n):
    out = 1.0
    for k in range(2, n + 1):
        out *= k
    return out


@njit(cache=True)
def _nondegenerate_widths(theta, dirs, widths):
    s = math.sin(theta)
    c = math.cos(theta)
    nd = 0
    for d in range(dirs.shape[0]):
        w = abs(s * dirs[d, 0] - c * dirs[d, 1])
        if w > DEGENERATE_TOL:
            widths[nd] = w
            nd += 1
    return nd


# Layout of a compiled profile buffer.
_H_MODE, _H_WIDTH, _H_WMIN, _H_NQ, _H_NR, _H_SQ, _H_PQ, _H_SR, _H_PR, _H_E = range(10)
_HEADER = 10
_MAX_SUB = 1 << MAX_DIRECTIONS
PROFILE_BUFFER_SIZE = _HEADER + MAX_DIRECTIONS + 4 * _MAX_SUB
# Factors thinner than this fraction of the widest one are folded into a
# short smoothing kernel instead of the truncated-power sum.
SPLIT_RATIO = 0.25
_MODE_DIRAC, _MODE_PLAIN, _MODE_SPLIT, _MODE_TRAPEZOID = -1.0, 0.0, 1.0, 2.0


@njit(cache=True)
def _build_profile(theta, dirs, buf):
    """Compile the profile of ``dirs`` at ``theta`` into ``buf``.

    The profile is ``Q * R`` with ``Q`` the convolution of the thick factors
    (truncated powers of degree ``pq``) and ``R`` that of the thin ones.
    Convolving a truncated power with ``R`` is done exactly: past the support
    of ``R`` through its moments, inside it through the truncated-power
    expansion of ``R`` integrated against ``z^pq``. Neither route divides by a
    thin width.
    """
    widths = np.empty(dirs.shape[0])
    nd = _nondegenerate_widths(theta, dirs, widths)
    buf[:_HEADER] = 0.0
    if nd == 0:
        buf[_H_MODE] = _MODE_DIRAC
        return
    total = 0.0
    wmax = 0.0
    wmin = widths[0]
    for d in range(nd):
        total += widths[d]
        wmax = max(wmax, widths[d])
        wmin = min(wmin, widths[d])
    buf[_H_WIDTH] = total
    buf[_H_WMIN] = wmin

    thick = np.empty(nd)
    thin = np.empty(nd)
    nq = 0
    nr = 0
    for d in range(nd):
        if widths[d] < SPLIT_RATIO * wmax:
            thin[nr] = widths[d]
            nr += 1
        else:
            thick[nq] = widths[d]
            nq += 1

    prod_q = 1.0
    for d in range(nq):
        prod_q *= thick[d]
    pq = nq - 1
    buf[_H_SQ] = 1.0 / (_factorial(pq) * prod_q)
    buf[_H_PQ] = pq

    if nd == 2:
        buf[_H_MODE] = _MODE_TRAPEZOID
        buf[_H_SQ] = 1.0 / (widths[0] * widths[1])
        return

    mom = buf[_HEADER:_HEADER + MAX_DIRECTIONS]
    qoff = _HEADER + MAX_DIRECTIONS
    qk = buf[qoff:qoff + _MAX_SUB]
    qc = buf[qoff + _MAX_SUB:qoff + 2 * _MAX_SUB]
    rk = buf[qoff + 2 * _MAX_SUB:qoff + 3 * _MAX_SUB]
    rc = buf[qoff + 3 * _MAX_SUB:qoff + 4 * _MAX_SUB]
    buf[_H_NQ] = _subset_expansion(thick, nq, qk, qc)
    if nr == 0:
        buf[_H_MODE] = _MODE_PLAIN
        return

    buf[_H_MODE] = _MODE_SPLIT
    buf[_H_NR] = _subset_expansion(thin, nr, rk, rc)
    prod_r = 1.0
    extent = 0.0
    for d in range(nr):
        prod_r *= thin[d]
        extent += thin[d]
    qr = nr - 1
    # int_m^z (z - s)^pq (s - m)^qr ds = pq! qr! / (pq + qr + 1)! (z - m)^(pq + qr + 1),
    # and the qr! cancels against the scale of R
    buf[_H_SR] = _factorial(pq) / (_factorial(pq + qr + 1) * prod_r)
    buf[_H_PR] = pq + qr + 1
    buf[_H_E] = extent

    # raw moments of a sum of independent uniforms on [0, w]
    raw = np.zeros(pq + 1)
    raw[0] = 1.0
    nxt = np.zeros(pq + 1)
    for d in range(nr):
        w = thin[d]
        for m in range(pq + 1):
            acc = 0.0
            binom = 1.0
            for j in range(m + 1):
                acc += binom * raw[m - j] * w**j / (j + 1)
                binom = binom * (m - j) / (j + 1)
            nxt[m] = acc
        raw[:] = nxt
    # Horner weights of sum_m C(pq, m) (-1)^m mu_m z^(pq - m)
    binom = 1.0
    sign = 1.0
    for m in range(pq + 1):
        mom[m] = binom * sign * raw[m]
        binom = binom * (pq - m) / (m + 1)
        sign = -sign


@njit(cache=True)
def _eval_profile(buf, y):
    mode = buf[_H_MODE]
    if mode == _MODE_DIRAC:
        return 0.0
    width = buf[_H_WIDTH]
    # profile is even: evaluate on the left half of [0, width]
    u = y + 0.5 * width
    v = width - u
    if v < u:
        u = v
    if u <= 0.0:
        return 0.0
    if mode == _MODE_TRAPEZOID:
        return min(u, buf[_H_WMIN]) * buf[_H_SQ]
    nq = int(buf[_H_NQ])
    pq = int(buf[_H_PQ])
    qoff = _HEADER + MAX_DIRECTIONS
    acc = 0.0
    if mode == _MODE_PLAIN:
        for j in range(nq):
            z = u - buf[qoff + j]
            if z <= 0.0:
                break
            acc += buf[qoff + _MAX_SUB + j] * z**pq
        return acc * buf[_H_SQ]
    nr = int(buf[_H_NR])
    pr = int(buf[_H_PR])
    extent = buf[_H_E]
    roff = qoff + 2 * _MAX_SUB
    for j in range(nq):
        z = u - buf[qoff + j]
        if z <= 0.0:
            break
        if z >= extent:
            t = 0.0
            for m in range(pq + 1):
                t = t * z + buf[_HEADER + m]
        else:
            t = 0.0
            for i in range(nr):
                d = z - buf[roff + i]
                if d <= 0.0:
                    break
                t += buf[roff + _MAX_SUB + i] * d**pr
            t *= buf[_H_SR]
        acc += buf[qoff + _MAX_SUB + j] * t
    return acc * buf[_H_SQ]


@njit(cache=True)
def _eval_profile_many(buf, ys, out):
    for i in range(ys.shape[0]):
        out[i] = _eval_profile(buf, ys[i])


@dataclass(frozen=True, eq=False)
class ProjectedProfile:
    """The projection ``y -> phi_theta(y)`` of a generator at one angle.

    ``knots``/``coefficients`` are the merged truncated-power expansion on
    ``[0, width]``: ``scale * sum_j coefficients[j] * (u - knots[j])_+^degree``
    with ``u = y + center_shift``. ``dirac`` marks a fully degenerate
    generator, which evaluates to zero.
    """

    theta: float
    knots: np.ndarray
    coefficients: np.ndarray
    degree: int
    scale: float
    width: float
    widths: tuple[float, ...]
    dirac: bool
    buffer: np.ndarray = field(repr=False)

    @property
    def center_shift(self) -> float:
        return 0.5 * self.width

    @property
    def support(self) -> tuple[float, float]:
        return (-0.5 * self.width, 0.5 * self.width)

    def __call__(self, y):
        return eval_profile(self, y)


def compile_profile(dirs: np.ndarray, theta: float) -> np.ndarray:
    buf = np.zeros(PROFILE_BUFFER_SIZE)
    _build_profile(float(theta), dirs, buf)
    return buf


def project_generator(gen: Generator, theta: float) -> ProjectedProfile:
    """Build the exact projected profile of ``gen`` at angle ``theta``."""
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    dirs = gen.directions_array
    widths = np.empty(len(dirs))
    nd = _nondegenerate_widths(float(theta), dirs, widths)
    widths = widths[:nd]
    knots = np.empty(1 << nd)
    coefs = np.empty(1 << nd)
    nk = _subset_expansion(widths, nd, knots, coefs) if nd else 0
    return ProjectedProfile(
        theta=float(theta),
        knots=knots[:nk].copy(),
        coefficients=coefs[:nk].copy(),
        degree=nd - 1,
        scale=1.0 / (math.factorial(max(nd - 1, 0)) * float(np.prod(widths))) if nd else 0.0,
        width=float(widths.sum()),
        widths=tuple(float(w) for w in widths),
        dirac=nd == 0,
        buffer=compile_profile(dirs, theta),
    )


def eval_profile(profile: ProjectedProfile, y):
    """Evaluate a projected profile at scalar or array ``y``."""
    if np.ndim(y) == 0:
        return _eval_profile(profile.buffer, float(y))
    ys = np.ascontiguousarray(y, dtype=np.float64)
    out = np.empty(ys.size)
    _eval_profile_many(profile.buffer, ys.ravel(), out)
    return out.reshape(ys.shape)


# ---------------------------------------------------------------------------
# Closed-form fast paths
# ---------------------------------------------------------------------------


@njit(cache=True)
def _box3_closed(theta, y):
    s = math.sin(theta)
    c = math.cos(theta)
    w1 = abs(s)
    w2 = abs(c)
    w3 = abs(s - c)
    # the three widths are {a, b, a + b}; keep the two smallest
    if w1 > w2:
        w1, w2 = w2, w1
    if w2 > w3:
        w2, w3 = w3, w2
    if w1 > w2:
        w1, w2 = w2, w1
    a = w1
    b = w2
    h = a + b
    u = y + h
    v = 2.0 * h - u
    if v < u:
        u = v
    if u <= 0.0:
        return 0.0
    inv = 1.0 / (2.0 * a * b * h)
    if u < a:
        return u * u * inv
    if u < b:
        return a * (2.0 * u - a) * inv
    return (2.0 * a * b - (u - h) * (u - h)) * inv


def eval_box3_fast(theta: float, y: float) -> float:
    """Projected 3-directional box-spline via its piecewise quadratic form.

    With ``a <= b`` the two thinnest factor widths (the third is ``a + b``),
    the profile on ``[0, 2(a+b)]`` is ``u^2``, ``a(2u - a)`` and
    ``2ab - (u - a - b)^2`` on ``[0, a)``, ``[a, b)``, ``[b, a+b]``, scaled by
    ``1/(2ab(a+b))`` and mirrored beyond ``a + b``.
    """
    s, c = math.sin(theta), math.cos(theta)
    widths = sorted((abs(s), abs(c), abs(s - c)))
    if widths[0] * widths[1] < FAST_PATH_TOL:
        return float(eval_profile(project_generator(Generator.box3(), theta), y))
    return _box3_closed(float(theta), float(y))


@njit(cache=True)
def _tensor_closed(theta, y, degree):
    # (1/b) beta(./b) convolved with (1/a) beta(./a), a <= b
    a = abs(math.sin(theta))
    b = abs(math.cos(theta))
    if a > b:
        a, b = b, a
    m = degree + 1
    u = y + 0.5 * m * (a + b)
    v = m * (a + b) - u
    if v < u:
        u = v
    if u <= 0.0:
        return 0.0
    acc = 0.0
    binom_j = 1.0
    sign_j = 1.0
    for j in range(m + 1):
        z = u - j * b
        if z <= 0.0:
            break
        if z >= m * a:
            if degree == 1:
                t = z - a
            else:
                t = (z - 1.5 * a) ** 2 + 0.25 * a * a
        else:
            t = 0.0
            binom_i = 1.0
            sign_i = 1.0
            for i in range(m + 1):
                d = z - i * a
                if d <= 0.0:
                    break
                t += sign_i * binom_i * d ** (2 * degree + 1)
                binom_i = binom_i * (m - i) / (i + 1)
                sign_i = -sign_i
            t /= (6.0 if degree == 1 else 60.0) * a**m
        acc += sign_j * binom_j * t
        binom_j = binom_j * (m - j) / (j + 1)
        sign_j = -sign_j
    return acc / ((1.0 if degree == 1 else 2.0) * b**m)


def eval_tensor_bspline1_fast(theta: float, y: float) -> float:
    """Projected bilinear tensor B-spline.

    Equals the cubic truncated-power sum at the subset sums of
    ``{a, a, b, b}`` (``a = |sin|``, ``b = |cos|``) with weights
    ``(1, -2, -2, 1, 4, 1, -2, -2, 1)`` and scale ``1 / (6 a^2 b^2)``,
    recentered by ``a + b``. It is evaluated as the scaled linear B-spline of
    the wider factor smoothed by that of the thinner one, which needs no
    division by the thin width outside its own support.
    """
    a, b = abs(math.sin(theta)), abs(math.cos(theta))
    if a * b < FAST_PATH_TOL:
        return float(eval_profile(project_generator(Generator.tensor_bspline(1), theta), y))
    return _tensor_closed(float(theta), float(y), 1)


def eval_tensor_bspline2_fast(theta: float, y: float) -> float:
    """Projected biquadratic tensor B-spline.

    Quintic truncated powers at ``i*a + j*b`` (``0 <= i, j <= 3``) weighted by
    ``(-1)^(i+j) C(3,i) C(3,j)``, scale ``1 / (120 a^3 b^3)``, recentered by
    ``3(a + b)/2``; evaluated in the same factored form as the bilinear case,
    where past the thin support the smoothing reduces to
    ``(z - 3a/2)^2 + a^2/4``.
    """
    a, b = abs(math.sin(theta)), abs(math.cos(theta))
    if a * b < FAST_PATH_TOL:
        return float(eval_profile(project_generator(Generator.tensor_bspline(2), theta), y))
    return _tensor_closed(float(theta), float(y), 2)


# ---------------------------------------------------------------------------
# Support geometry and neighbor counts
# ---------------------------------------------------------------------------


def support_vertices(gen: Generator) -> np.ndarray:
    """All sign combinations of ``sum(+-u_d / 2)``; the support is their hull."""
    dirs = gen.directions_array
    signs = np.array(list(itertools.product((-0.5, 0.5), repeat=len(dirs))))
    return signs @ dirs


def support_radius(gen: Generator) -> float:
    """Circumradius of the (centered) support polygon."""
    return float(np.max(np.hypot(*support_vertices(gen).T)))


def octagon_girth(gen: Generator) -> float:
    """Smallest ``L`` such that the support fits the octagon
    ``|x|, |y| <= L/2, |x| + |y| <= (L + 1)/2``."""
    v = np.abs(support_vertices(gen))
    girth = max(2 * v[:, 0].max(), 2 * v[:, 1].max(), 2 * (v[:, 0] + v[:, 1]).max() - 1)
    return float(np.round(girth, 12))


def disk_neighbor_bound(radius: float) -> int:
    return max(0, math.ceil(math.sqrt(2.0) * radius - 1.0 - 1e-12))


def octagon_neighbor_bound(girth: float) -> int:
    # equals floor(L/2) for integer L
    return max(0, math.ceil((girth - 1.0) / 2.0 - 1e-12))


def required_neighbors(gen: Generator) -> int:
    """Exact neighbor count from the support function of the generator.

    For a mainly vertical line with slope ratio ``tau = cos/sin`` the crossed
    run in the row of a basis center can end at most
    ``0.5 + h(1, -tau) - |tau|/2`` cells away, ``h`` being the support
    function; the bound is piecewise linear in ``tau`` so its maximum sits on
    a breakpoint or an endpoint of ``[-1, 1]``.
    """
    dirs = gen.directions_array
    worst = 0
    for major, minor in ((0, 1), (1, 0)):
        taus = {-1.0, 0.0, 1.0}
        for u in dirs:
            if u[minor] != 0.0:
                t = u[major] / u[minor]
                if -1.0 <= t <= 1.0:
                    taus.add(float(t))
        for tau in taus:
            reach = 0.5 + 0.5 * np.abs(dirs[:, major] - tau * dirs[:, minor]).sum() - 0.5 * abs(tau)
            worst = max(worst, math.ceil(reach - 1e-12) - 1)
    return worst


@lru_cache(maxsize=None)
def neighbor_count(gen: Generator) -> int:
    """Neighbors evaluated on each side of a crossed run.

    The tighter of the disk and octagon bounds, raised to the exact
    requirement when a bound is optimistic for the given support.
    """
    bound = min(disk_neighbor_bound(support_radius(gen)), octagon_neighbor_bound(octagon_girth(gen)))
    return max(bound, required_neighbors(gen))


def trace_margin(gen: Generator) -> int:
    """Cells added around the grid so that every support a ray meets is traced."""
    radius = support_radius(gen)
    if radius <= math.sqrt(0.5) + 1e-12:
        return 0
    return math.ceil(math.sqrt(2.0) * radius) + 1


# ---------------------------------------------------------------------------
# Spatial evaluation
# ---------------------------------------------------------------------------


def bspline_1d(x, degree: int):
    """Centered univariate B-spline of the given degree."""
    x = np.asarray(x, dtype=np.float64)
    if degree == 0:
        return ((x >= -0.5) & (x < 0.5)).astype(np.float64)
    m = degree + 1
    out = np.zeros_like(x)
    for k in range(m + 1):
        out += (-1) ** k * math.comb(m, k) * np.maximum(x + 0.5 * m - k, 0.0) ** degree
    out /= math.factorial(degree)
    out[np.abs(x) >= 0.5 * m] = 0.0
    return out


def _box3_2d(x1, x2):
    lo = np.maximum(np.maximum(-0.5, x1 - 0.5), x2 - 0.5)
    hi = np.minimum(np.minimum(0.5, x1 + 0.5), x2 + 0.5)
    return np.maximum(hi - lo, 0.0)


def _box4_2d(x1: float, x2: float) -> float:
    # integral over t of box3(x1 - t, x2 + t): piecewise linear in t
    cand = [
        x1, -x2, 0.5 * (x1 - x2), x1 - 1.0, 1.0 - x2, x1 + 1.0, -x2 - 1.0,
        0.5 * (x1 - x2 + 1.0), 0.5 * (x1 - x2 - 1.0),
    ]
    ts = sorted({-0.5, 0.5, *(t for t in cand if -0.5 < t < 0.5)})
    ts = np.array(ts)
    vals = _box3_2d(x1 - ts, x2 + ts)
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(ts)))


def _generic_2d(dirs: np.ndarray, x: np.ndarray) -> float:
    # peel directions until two independent ones remain
    if len(dirs) == 2:
        det = dirs[0, 0] * dirs[1, 1] - dirs[0, 1] * dirs[1, 0]
        if abs(det) < 1e-14:
            return 0.0
        t = np.linalg.solve(dirs.T, x)
        return float(np.all(np.abs(t) < 0.5)) / abs(det)
    order = _independent_first(dirs)
    head, last = dirs[order[:-1]], dirs[order[-1]]
    val, _ = integrate.quad(lambda t: _generic_2d(head, x - t * last), -0.5, 0.5, limit=200)
    return float(val)


def _independent_first(dirs: np.ndarray) -> list[int]:
    for i, j in itertools.combinations(range(len(dirs)), 2):
        if abs(dirs[i, 0] * dirs[j, 1] - dirs[i, 1] * dirs[j, 0]) > 1e-14:
            rest = [k for k in range(len(dirs)) if k not in (i, j)]
            return [i, j, *rest]
    raise ValueError("directions do not span the plane")


def eval_generator_2d(gen: Generator, x) -> float:
    """Value of the centered generator at the point ``x``."""
    x1, x2 = float(x[0]), float(x[1])
    if gen.kind == "pixel":
        return float(-0.5 <= x1 < 0.5 and -0.5 <= x2 < 0.5)
    if gen.kind == "bspline":
        return float(bspline_1d(x1, gen.degree) * bspline_1d(x2, gen.degree))
    if gen.kind == "box3":
        return float(_box3_2d(x1, x2))
    if gen.kind == "box4":
        return _box4_2d(x1, x2)
    return _generic_2d(gen.directions_array, np.array([x1, x2]))


def fourier_hat(gen: Generator, xi) -> complex:
    """Fourier transform ``prod_d sinc(<xi, u_d> / 2pi)`` of the generator."""
    xi = np.asarray(xi, dtype=np.float64)
    proj = gen.directions_array @ xi
    return complex(np.prod(np.sinc(proj / (2.0 * np.pi))))
