"""One-dimensional numerical primitives.

Adaptive Gauss-Kronrod (7/15) quadrature with a global error heap, a
tail-truncated variant for the real line, piecewise integration between
known kinks, and a grid-plus-golden-section maximizer.

Integrands are called with numpy arrays when they support it; scalar-only
callables are detected once per call and evaluated point by point.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import IntegrationError, PreconditionError

# QUADPACK qk15 abscissae (positive half, descending) and weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-point node set on [-1, 1] and matching weights; the 7-point Gauss
# rule uses the odd-indexed Kronrod nodes.
GK_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
GK_KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
GK_GAUSS_WEIGHTS = np.zeros(15)
GK_GAUSS_WEIGHTS[1::2] = np.concatenate([_WG[:-1], [_WG[-1]], _WG[-2::-1]])


@dataclass(frozen=True)
class QuadSettings:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 10_000
    tail_cutoff: float = 12.0

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise PreconditionError("abs_tol must be positive")
        if not self.rel_tol >= 0:
            raise PreconditionError("rel_tol must be nonnegative")
        if self.max_subdivisions < 1:
            raise PreconditionError("max_subdivisions must be >= 1")
        if not self.tail_cutoff > 0:
            raise PreconditionError("tail_cutoff must be positive")


DEFAULT_SETTINGS = QuadSettings()


@dataclass(frozen=True)
class MaxResult:
    argmax: float
    value: float
    bracket_width: float


def as_vectorized(f: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Return a callable that maps a 1-D float array to a float array."""
    probe = np.array([0.25, 0.5])
    try:
        out = np.asarray(f(probe), dtype=float)
        if out.shape == probe.shape:
            return lambda x: np.asarray(f(x), dtype=float)
    except Exception:
        pass
    return lambda x: np.array([float(f(float(v))) for v in x])


def gk15(fv: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> tuple[float, float]:
    """Kronrod estimate and |Kronrod - Gauss| on one interval."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    vals = fv(mid + half * GK_NODES)
    k = half * float(GK_KRONROD_WEIGHTS @ vals)
    g = half * float(GK_GAUSS_WEIGHTS @ vals)
    return k, abs(k - g)


def integrate(f: Callable, lo: float, hi: float, settings: QuadSettings | None = None) -> float:
    """Adaptive integral of ``f`` over ``[lo, hi]``.

    Raises :class:`IntegrationError` when ``max_subdivisions`` bisections do
    not bring the summed error estimate under
    ``max(abs_tol, rel_tol * |Q|)``.
    """
    s = settings or DEFAULT_SETTINGS
    if not lo <= hi:
        raise PreconditionError(f"integrate needs lo <= hi, got [{lo}, {hi}]")
    if lo == hi:
        return 0.0
    fv = as_vectorized(f)
    k, e = gk15(fv, lo, hi)
    heap = [(-e, lo, hi, k)]
    total, err = k, e
    splits = 0
    while err > max(s.abs_tol, s.rel_tol * abs(total)):
        if splits >= s.max_subdivisions:
            raise IntegrationError("subdivision budget exhausted", total, err)
        neg_e, a, b, kk = heapq.heappop(heap)
        m = 0.5 * (a + b)
        if not a < m < b:
            # interval has collapsed to adjacent floats; nothing left to refine
            raise IntegrationError("interval collapsed at machine precision", total, err)
        k1, e1 = gk15(fv, a, m)
        k2, e2 = gk15(fv, m, b)
        total += k1 + k2 - kk
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, a, m, k1))
        heapq.heappush(heap, (-e2, m, b, k2))
        splits += 1
    # re-sum from the leaves to shed drift from incremental updates
    return math.fsum(item[3] for item in heap)


def integrate_piecewise(f: Callable, breakpoints: Sequence[float],
                        settings: QuadSettings | None = None) -> float:
    """Integrate over ``[breakpoints[0], breakpoints[-1]]`` piece by piece.

    Use this when ``f`` has kinks at known locations.
    """
    pts = sorted(float(b) for b in breakpoints)
    return math.fsum(integrate(f, a, b, settings) for a, b in zip(pts[:-1], pts[1:]) if b > a)


def integrate_real_line(f: Callable, settings: QuadSettings | None = None,
                        breakpoints: Sequence[float] = ()) -> float:
    """Integral over the real line, truncated to ``[-T, T]``.

    The caller must ensure the tails beyond ``tail_cutoff`` are negligible.
    """
    s = settings or DEFAULT_SETTINGS
    T = s.tail_cutoff
    inner = [b for b in breakpoints if -T < b < T]
    return integrate_piecewise(f, [-T, *inner, T], s)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def maximize_1d(f: Callable, lo: float, hi: float, grid_points: int = 2001,
                refine_tol: float = 1e-12) -> MaxResult:
    """Maximize a continuous ``f`` on ``[lo, hi]``.

    Scans ``grid_points`` equispaced samples, then golden-section refines in
    the two cells around the best sample. Only the maximum inside the best
    grid cell is found; narrow peaks between samples can be missed.
    """
    if not hi > lo:
        raise PreconditionError("maximize_1d needs hi > lo")
    if grid_points < 3:
        raise PreconditionError("grid_points must be >= 3")
    fv = as_vectorized(f)
    xs = np.linspace(lo, hi, grid_points)
    ys = fv(xs)
    i = int(np.argmax(ys))
    best_x, best_y = float(xs[i]), float(ys[i])
    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, grid_points - 1)])

    def g(x):
        return float(fv(np.array([x]))[0])

    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = g(c), g(d)
    while b - a > refine_tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = g(d)
        if b - a <= 4 * np.spacing(max(abs(a), abs(b), 1.0)):
            break
    x_ref = 0.5 * (a + b)
    y_ref = g(x_ref)
    for x, y in ((c, fc), (d, fd), (x_ref, y_ref)):
        if y > best_y:
            best_x, best_y = x, y
    return MaxResult(argmax=best_x, value=best_y, bracket_width=b - a)


# --- fixed-order rules used by vectorized multi-box integration ------------

def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def tensor_rule(n: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre rule on ``[0, 1]^dim``: nodes (m, dim), weights (m,)."""
    x, w = gauss_legendre(n)
    if dim == 0:
        return np.zeros((1, 0)), np.ones(1)
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return nodes, weights
