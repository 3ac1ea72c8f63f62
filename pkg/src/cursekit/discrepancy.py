"""L_p discrepancies anchored at a point and quadrant discrepancies at a point.

Test sets for t in [0, 1]^d are products of one-dimensional pieces:

* anchored: J(t) = prod [min(t_j, a), max(t_j, a))
* quadrant: Q(t) = prod Q(t_j) with Q(t) = [0, t) for t < a and [t, 1) otherwise

The discrepancy is the L_p norm over t of (1/N) #{k : y_k in set(t)} - Vol(set(t)).
The generalized variants take the l_p sum over all coordinate projections.

Backends:

``closed-form-p2``
    p = 2 only. The square expands into products of one-dimensional kernels.
``box-exact``
    Any p >= 1. The cube is cut at a and at every node coordinate so the
    count is constant on each box; the last axis is integrated analytically
    and the rest by adaptive tensor Gauss-Legendre.
``monte-carlo``
    Any p >= 1. Seeded SplitMix64 samples with a delta-method standard error.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from ._backend import kernels, thread_count
from .errors import BudgetExceededError, PreconditionError
from .numerics import QuadSettings
from .pointsets import PointSet, anchor_transform, uniform01


class Family(str, enum.Enum):
    ANCHORED = "anchored"
    QUADRANT = "quadrant"


class Backend(str, enum.Enum):
    CLOSED_FORM_P2 = "closed-form-p2"
    BOX_EXACT = "box-exact"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class DiscrepancyKind:
    family: Family
    p: float = 2.0
    a: float = 0.5
    generalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "p", float(self.p))
        if not self.p >= 1 or not math.isfinite(self.p):
            raise PreconditionError(f"discrepancy exponent p must be in [1, inf), got {self.p}")
        if not 0 < self.a < 1:
            raise PreconditionError(f"a must lie in (0, 1), got {self.a}")


@dataclass(frozen=True)
class DiscrepancyResult:
    value: float
    backend: Backend
    stderr: float = 0.0
    n_samples: int = 0


@dataclass(frozen=True)
class DiscrepancySettings:
    quad: QuadSettings = field(default_factory=QuadSettings)
    max_boxes: int = 2_000_000
    max_depth: int = 40
    n_samples: int = 1_000_000
    seed: int | None = None
    d_max: int = 16
    threads: int | None = None


DEFAULT_DISC_SETTINGS = DiscrepancySettings()


def _initial_power(kind: DiscrepancyKind, d: int) -> float:
    """Discrepancy of the empty set, raised to the power p."""
    p, a = kind.p, kind.a
    one_d = (a ** (p + 1) + (1 - a) ** (p + 1)) / (p + 1)
    return (1.0 + one_d) ** d if kind.generalized else one_d ** d


def initial_discrepancy(kind: DiscrepancyKind, d: int) -> float:
    return _initial_power(kind, d) ** (1.0 / kind.p)


# --- definition -------------------------------------------------------------

def _membership(family: Family, a: float, y: np.ndarray, t: np.ndarray) -> np.ndarray:
    if family is Family.ANCHORED:
        return (np.minimum(t, a) <= y) & (y < np.maximum(t, a))
    return np.where(t < a, y < t, y >= t)


def _volume(family: Family, a: float, t: np.ndarray) -> np.ndarray:
    if family is Family.ANCHORED:
        return np.abs(t - a)
    return np.where(t < a, t, 1.0 - t)


def local_discrepancy(kind: DiscrepancyKind, ps: PointSet, t) -> float:
    """(1/N) #{k : y_k in set(t)} - Vol(set(t)); the count is 0 for N = 0."""
    if kind.generalized:
        raise PreconditionError("local_discrepancy is defined for the plain families only")
    t = np.asarray(t, dtype=float).reshape(ps.d)
    vol = float(np.prod(_volume(kind.family, kind.a, t)))
    if ps.n == 0:
        return -vol
    inside = np.all(_membership(kind.family, kind.a, ps.nodes, t[None, :]), axis=1)
    return float(np.count_nonzero(inside)) / ps.n - vol


# --- closed form for p = 2 --------------------------------------------------

def p2_kernels(family, a: float):
    """One-dimensional kernels (m2, b, c) of the squared L2 discrepancy.

    m2 = int (Vol)^2, b(y) = int 1[y in set(t)] Vol(t) dt and
    c(y, y') = int 1[y in set(t)] 1[y' in set(t)] dt.
    """
    family = Family(family)
    m2 = (a ** 3 + (1 - a) ** 3) / 3.0

    if family is Family.ANCHORED:
        def b(y):
            y = np.asarray(y, dtype=float)
            return np.where(y < a, a * y - 0.5 * y * y, 0.5 * ((1 - a) ** 2 - (y - a) ** 2))

        def c(y, z):
            y, z = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(z, dtype=float))
            lo = (y < a) & (z < a)
            hi = (y >= a) & (z >= a)
            return np.where(lo, np.minimum(y, z), np.where(hi, 1.0 - np.maximum(y, z), 0.0))
    else:
        def b(y):
            y = np.asarray(y, dtype=float)
            return np.where(y < a, 0.5 * (a * a - y * y), 0.5 * ((1 - a) ** 2 - (1 - y) ** 2))

        def c(y, z):
            y, z = np.asarray(y, dtype=float), np.asarray(z, dtype=float)
            return (np.maximum(0.0, a - np.maximum(y, z))
                    + np.maximum(0.0, np.minimum(y, z) - a))
    return m2, b, c


def _closed_form_p2(kind: DiscrepancyKind, nodes: np.ndarray) -> float:
    N, d = nodes.shape
    m2, b, c = p2_kernels(kind.family, kind.a)
    shift = 1.0 if kind.generalized else 0.0
    first = (shift + m2) ** d
    if N == 0:
        return first
    prod_b = np.prod(shift + b(nodes), axis=1)
    second = 2.0 / N * math.fsum(prod_b)
    third = 0.0
    rows = []
    for k in range(N):
        rows.append(math.fsum(np.prod(shift + c(nodes[k][None, :], nodes), axis=1)))
    third = math.fsum(rows) / N ** 2
    return max(first - second + third, 0.0)


# --- exact box decomposition -------------------------------------------------

def _axis_cells(family: Family, a: float, y: np.ndarray):
    """Cells of one axis: bounds, membership (N, m), and linear volume factor c0 + c1 t."""
    bp = np.unique(np.concatenate([[0.0, a, 1.0], y]))
    lo, hi = bp[:-1], bp[1:]
    below = hi <= a
    yy = y[:, None]
    if family is Family.ANCHORED:
        member = np.where(below[None, :], (yy >= hi[None, :]) & (yy < a),
                          (yy >= a) & (yy <= lo[None, :]))
        c0 = np.where(below, a, -a)
        c1 = np.where(below, -1.0, 1.0)
    else:
        member = np.where(below[None, :], yy <= lo[None, :], yy >= hi[None, :])
        c0 = np.where(below, 0.0, 1.0)
        c1 = np.where(below, 1.0, -1.0)
    return lo, hi, member, c0, c1


def _box_counts(members: list[np.ndarray], N: int) -> np.ndarray:
    shape = tuple(m.shape[1] for m in members)
    counts = np.zeros(shape, dtype=np.int64)
    if N == 0:
        return counts
    size = math.prod(shape)
    step = max(1, 4_000_000 // max(size, 1))
    for s in range(0, N, step):
        acc = members[0][s:s + step].astype(np.int64)
        for m in members[1:]:
            acc = (acc[:, :, None] * m[s:s + step, None, :]).reshape(acc.shape[0], -1)
        counts += acc.sum(axis=0).reshape(shape)
    return counts


def _last_axis_integral(P, C, wlo, whi, p):
    """int_{wlo}^{whi} |C - P w|^p dw, vectorized, stable for small P."""
    delta = whi - wlo
    zm = C - P * 0.5 * (whi + wlo)
    h = 0.5 * P * delta
    out = np.empty_like(zm)
    absz = np.abs(zm)
    taylor = h <= 1e-3 * absz
    if np.any(taylor):
        zt, dt, Pt = absz[taylor], delta[taylor], P[taylor]
        corr = p * (p - 1) * zt ** (p - 2) * Pt * Pt * dt ** 3 / 24.0 if p != 1 else 0.0
        out[taylor] = dt * zt ** p + corr
    rest = ~taylor
    if np.any(rest):
        Pr, Cr = P[rest], C[rest]
        z_lo, z_hi = Cr - Pr * whi[rest], Cr - Pr * wlo[rest]
        Hh = np.sign(z_hi) * np.abs(z_hi) ** (p + 1)
        Hl = np.sign(z_lo) * np.abs(z_lo) ** (p + 1)
        out[rest] = (Hh - Hl) / ((p + 1) * Pr)
    return out


_GL_HI = 8
_GL_LO = 4


def _box_exact_power(kind: DiscrepancyKind, nodes: np.ndarray, s: DiscrepancySettings) -> float:
    """Integral of |local discrepancy|^p over [0, 1]^d (plain family)."""
    N, d = nodes.shape
    p, a, fam = kind.p, kind.a, kind.family
    axes = [_axis_cells(fam, a, nodes[:, j]) for j in range(d)]
    n_boxes = math.prod(len(ax[0]) for ax in axes)
    if n_boxes > s.max_boxes:
        raise BudgetExceededError(
            f"box-exact needs {n_boxes} boxes, budget is {s.max_boxes}; use monte-carlo")
    counts = _box_counts([ax[2] for ax in axes], N)
    C = counts.ravel().astype(float) / N if N else np.zeros(n_boxes)
    idx = np.indices(counts.shape).reshape(d, -1)

    lo_d, hi_d, _, c0_d, c1_d = axes[-1]
    last = idx[-1]
    w1 = c0_d[last] + c1_d[last] * lo_d[last]
    w2 = c0_d[last] + c1_d[last] * hi_d[last]
    wlo, whi = np.minimum(w1, w2), np.maximum(w1, w2)
    k = d - 1
    if k == 0:
        return math.fsum(_last_axis_integral(np.ones(n_boxes), C, wlo, whi, p))

    blo = np.stack([axes[j][0][idx[j]] for j in range(k)], axis=1)
    bhi = np.stack([axes[j][1][idx[j]] for j in range(k)], axis=1)
    c0 = np.stack([axes[j][3][idx[j]] for j in range(k)], axis=1)
    c1 = np.stack([axes[j][4][idx[j]] for j in range(k)], axis=1)

    exact_parts = []
    zero = C == 0.0
    if np.any(zero):
        # no node in the test set: |Vol|^p factorizes over the axes
        def axis_int(c0_, c1_, l, u):
            return ((c0_ + c1_ * u) ** (p + 1) - (c0_ + c1_ * l) ** (p + 1)) / ((p + 1) * c1_)
        inner = (whi[zero] ** (p + 1) - wlo[zero] ** (p + 1)) / (p + 1)
        exact_parts.append(np.prod(axis_int(c0[zero], c1[zero], blo[zero], bhi[zero]), axis=1) * inner)

    integer_p = p.is_integer()
    even_p = integer_p and int(p) % 2 == 0
    n_hi = max(_GL_HI, math.ceil((p + 2) / 2))
    rule_hi = numerics.tensor_rule(n_hi, k)
    rule_lo = numerics.tensor_rule(_GL_LO, k)

    def estimate(ids, lo, hi, rule):
        x, w = rule
        width = hi - lo
        vol = np.prod(width, axis=1)
        t = lo[:, None, :] + width[:, None, :] * x[None, :, :]
        P = np.prod(c0[ids][:, None, :] + c1[ids][:, None, :] * t, axis=2)
        m = x.shape[0]
        F = _last_axis_integral(P.ravel(), np.repeat(C[ids], m),
                                np.repeat(wlo[ids], m), np.repeat(whi[ids], m), p)
        return vol * (F.reshape(-1, m) @ w)

    def chunked(ids, lo, hi, rule):
        step = max(1, 2_000_000 // (rule[0].shape[0] * k + 1))
        if ids.size == 0:
            return np.zeros(0)
        return np.concatenate([estimate(ids[i:i + step], lo[i:i + step], hi[i:i + step], rule)
                               for i in range(0, ids.size, step)])

    def classify_and_estimate(ids, lo, hi):
        va = c0[ids] + c1[ids] * lo
        vb = c0[ids] + c1[ids] * hi
        vmin = np.prod(np.minimum(va, vb), axis=1) * wlo[ids]
        vmax = np.prod(np.maximum(va, vb), axis=1) * whi[ids]
        crossing = (vmin < C[ids]) & (C[ids] < vmax)
        # integer p without a sign change (or any even p) gives a polynomial integrand
        poly = np.full(ids.size, even_p) | (integer_p & ~crossing)
        q = chunked(ids, lo, hi, rule_hi)
        err = np.zeros(ids.size)
        rest = np.flatnonzero(~poly)
        if rest.size:
            err[rest] = np.abs(q[rest] - chunked(ids[rest], lo[rest], hi[rest], rule_lo))
        return q, err

    # global error control: keep bisecting the boxes that carry most of the
    # estimated error until the total estimate meets the tolerance
    ids = np.flatnonzero(~zero)
    lo, hi = blo[ids], bhi[ids]
    q, err = classify_and_estimate(ids, lo, hi)
    depth = np.zeros(ids.size, dtype=np.int64)
    exact_total = math.fsum(np.concatenate(exact_parts)) if exact_parts else 0.0
    frozen: list[np.ndarray] = []
    budget = 20 * s.max_boxes
    evaluated = ids.size
    while ids.size:
        total_err = float(np.sum(err))
        tol = max(s.quad.abs_tol, s.quad.rel_tol * abs(exact_total + float(np.sum(q))))
        if total_err <= tol:
            break
        done = (err == 0.0) | (depth >= s.max_depth)
        if np.all(done):
            break
        order = np.argsort(-np.where(done, -1.0, err), kind="stable")
        cum = np.cumsum(np.where(done, 0.0, err)[order])
        n_split = int(np.searchsorted(cum, 0.5 * cum[-1])) + 1
        split = np.zeros(ids.size, dtype=bool)
        split[order[:n_split]] = True
        keep = ~split
        frozen.append(q[keep & (err == 0.0)])
        soft = keep & (err != 0.0)
        s_ids, s_lo, s_hi, s_d = ids[split], lo[split], hi[split], depth[split] + 1
        ax = np.argmax(s_hi - s_lo, axis=1)
        rows = np.arange(s_ids.size)
        mid = 0.5 * (s_lo[rows, ax] + s_hi[rows, ax])
        lo2, hi1 = s_lo.copy(), s_hi.copy()
        hi1[rows, ax] = mid
        lo2[rows, ax] = mid
        n_ids = np.concatenate([s_ids, s_ids])
        n_lo = np.concatenate([s_lo, lo2])
        n_hi = np.concatenate([hi1, s_hi])
        evaluated += n_ids.size
        if evaluated > budget:
            raise BudgetExceededError("adaptive box refinement exceeded its evaluation budget")
        n_q, n_err = classify_and_estimate(n_ids, n_lo, n_hi)
        ids = np.concatenate([ids[soft], n_ids])
        lo = np.concatenate([lo[soft], n_lo])
        hi = np.concatenate([hi[soft], n_hi])
        q = np.concatenate([q[soft], n_q])
        err = np.concatenate([err[soft], n_err])
        depth = np.concatenate([depth[soft], s_d, s_d])
    return math.fsum(np.concatenate(exact_parts + frozen + [q]))


# --- Monte Carlo --------------------------------------------------------------

_MC_CHUNK = 65_536


def _mc_samples(kind: DiscrepancyKind, nodes: np.ndarray, subsets, s: DiscrepancySettings):
    """Per-sample sum over ``subsets`` of |local discrepancy|^p, streamed in chunks."""
    N, d = nodes.shape
    n = s.n_samples
    quadrant = kind.family is Family.QUADRANT
    total = 0.0
    total_sq = 0.0
    for start in range(0, n, _MC_CHUNK):
        m = min(_MC_CHUNK, n - start)
        t = uniform01(s.seed, m * d, offset=start * d).reshape(m, d)
        acc = np.zeros(m)
        for u in subsets:
            if not u:
                acc += 0.0 if N else 1.0
                continue
            acc += kernels.abs_local_discrepancy_power(
                np.ascontiguousarray(nodes[:, u]), np.ascontiguousarray(t[:, u]),
                kind.a, quadrant, kind.p)
        total += math.fsum(acc)
        total_sq += math.fsum(acc * acc)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return mean, math.sqrt(var / n)


# --- public entry points ------------------------------------------------------

def _subsets(d: int):
    return [[j for j in range(d) if u >> j & 1] for u in range(1 << d)]


def _plain_power(kind: DiscrepancyKind, nodes: np.ndarray, backend: Backend,
                 s: DiscrepancySettings) -> float:
    if backend is Backend.CLOSED_FORM_P2:
        return _closed_form_p2(kind, nodes)
    return _box_exact_power(kind, nodes, s)


def discrepancy(kind: DiscrepancyKind, ps: PointSet, backend=Backend.BOX_EXACT,
                settings: DiscrepancySettings | None = None) -> DiscrepancyResult:
    """L_p discrepancy of ``ps`` for ``kind`` with the requested backend."""
    s = settings or DEFAULT_DISC_SETTINGS
    backend = Backend(backend)
    if ps.weights is not None:
        raise PreconditionError("discrepancy is defined for equal-weight node sets")
    if ps.domain.value != "cube":
        raise PreconditionError("discrepancy needs nodes in the unit cube")
    nodes = np.ascontiguousarray(ps.nodes)
    N, d = nodes.shape
    p = kind.p
    if backend is Backend.CLOSED_FORM_P2 and p != 2.0:
        raise PreconditionError("closed-form-p2 backend requires p = 2")
    if kind.generalized and d > s.d_max:
        raise BudgetExceededError(
            f"generalized discrepancy enumerates 2^d projections; d={d} exceeds d_max={s.d_max}")

    if backend is Backend.MONTE_CARLO:
        if s.seed is None:
            raise PreconditionError("monte-carlo backend needs an explicit seed")
        if s.n_samples < 2:
            raise PreconditionError("monte-carlo backend needs at least 2 samples")
        subsets = _subsets(d) if kind.generalized else [list(range(d))]
        mean, se = _mc_samples(kind, nodes, subsets, s)
        value = mean ** (1.0 / p)
        stderr = se * value / (p * mean) if mean > 0 else 0.0
        return DiscrepancyResult(value, backend, stderr, s.n_samples)

    if backend is Backend.CLOSED_FORM_P2:
        power = _closed_form_p2(kind, nodes)
    elif not kind.generalized:
        power = _box_exact_power(kind, nodes, s)
    else:
        plain = DiscrepancyKind(kind.family, p, kind.a, False)
        subsets = [u for u in _subsets(d) if u]
        workers = min(s.threads or thread_count(), len(subsets))

        def one(u):
            return _box_exact_power(plain, np.ascontiguousarray(nodes[:, u]), s)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(one, subsets))
        else:
            parts = [one(u) for u in subsets]
        # empty projection: the whole cube is the test set, so the local
        # discrepancy is 1 - 1 = 0 with nodes and 0 - 1 without
        power = math.fsum([0.0 if N else 1.0, *parts])
    return DiscrepancyResult(power ** (1.0 / p), backend)


def qmc_worst_case_error(spec, ps: PointSet, backend=Backend.BOX_EXACT, family=Family.ANCHORED,
                         settings: DiscrepancySettings | None = None) -> DiscrepancyResult:
    """Worst-case error of the equal-weight rule on ``ps`` in a first-order Sobolev space.

    The anchored family is evaluated on the reflected nodes (a - x) mod 1, the
    quadrant family on the nodes themselves. The space without anchor uses
    the generalized discrepancies.
    """
    from .spaces import SpaceKind

    if spec.kind is SpaceKind.POLY2 or spec.r != 1:
        raise PreconditionError("QMC error via discrepancy needs a first-order Sobolev space")
    family = Family(family)
    generalized = spec.kind is SpaceKind.NO_ANCHOR_SOBOLEV
    kind = DiscrepancyKind(family, spec.p, spec.a, generalized)
    pts = anchor_transform(ps, spec.a) if family is Family.ANCHORED else ps
    return discrepancy(kind, pts, backend, settings)
