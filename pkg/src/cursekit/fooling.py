"""Lower bounds for arbitrary node sets from fooling functions.

Let h1 = h1_smooth + h1_part0 + h1_part1 be a worst-case function whose
parts live left and right of the split point a. A quadrant of D^d is picked
by a subset u of coordinates (low side on u, high side elsewhere); the
tensor product of the matching parts has integral I0^|u| I1^(d-|u|).
Summing the products over quadrants that contain no node gives a function
that vanishes at every node, and its integral bounds the error of every
linear rule on those nodes from below.

With a smooth part, every coordinate outside u uses h1_smooth and the
quadrant sum runs over subsets v of u, weighted by alpha1^(d-|u|).

A node coordinate equal to a lies in both closed halves and is counted as
hitting both, which can only lower the bound.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping

import numpy as np
from scipy.special import gammaln, logsumexp

from ._backend import kernels
from .errors import BudgetExceededError, PreconditionError
from .pointsets import PointSet
from .spaces import WcDecomposition

MAX_EXPANDED_PATTERNS = 1_000_000
MAX_SUBSET_DIM = 20


class Side(str, enum.Enum):
    LOW = "low"
    HIGH = "high"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class QuadrantPattern:
    bits: tuple[Side, ...]

    @property
    def boundary_count(self) -> int:
        return sum(b is Side.BOUNDARY for b in self.bits)


def pattern_of(node, a: float) -> QuadrantPattern:
    """Per-coordinate side of ``a`` with an exact test for equality."""
    return QuadrantPattern(tuple(
        Side.BOUNDARY if x == a else (Side.LOW if x < a else Side.HIGH)
        for x in np.asarray(node, dtype=float).ravel()))


class CertTheorem(str, enum.Enum):
    THM1_EXACT = "thm1-exact"
    THM1_CLOSED = "thm1-closed"
    THM3_EXACT = "thm3-exact"
    THM3_CLOSED = "thm3-closed"
    THM5 = "thm5"


@dataclass(frozen=True)
class Certificate:
    """Lower bound on the worst-case error of every admissible rule on a node set."""
    bound_absolute: float
    bound_normalized: float
    theorem: CertTheorem
    n_nodes: int
    d: int
    constants_used: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.bound_normalized <= 1.0:
            raise ValueError(f"normalized bound {self.bound_normalized!r} outside [0, 1]")


def _clip01(x: float) -> float:
    return min(1.0, max(0.0, x))


def _expanded_low_masks(nodes: np.ndarray, a: float) -> np.ndarray:
    """Boolean rows (M, d): one row per quadrant touched by a node.

    A row marks the coordinates on the low side. A coordinate equal to ``a``
    spawns both a low and a high copy.
    """
    N, d = nodes.shape
    low = nodes < a
    bnd = nodes == a
    nb = bnd.sum(axis=1)
    total = int(np.sum(np.left_shift(1, np.minimum(nb, 62)).astype(object)))
    if total > MAX_EXPANDED_PATTERNS:
        raise BudgetExceededError(
            f"nodes on the split point expand to {total} quadrant patterns "
            f"(limit {MAX_EXPANDED_PATTERNS}); perturb coordinates equal to a")
    plain = low[nb == 0]
    extra = []
    for k in np.flatnonzero(nb):
        cols = np.flatnonzero(bnd[k])
        for choice in product((False, True), repeat=len(cols)):
            row = low[k].copy()
            row[cols] = choice
            extra.append(row)
    if extra:
        return np.vstack([plain, np.array(extra)])
    return plain


def _unique_rows(rows: np.ndarray) -> np.ndarray:
    if rows.shape[0] == 0:
        return rows
    packed = np.packbits(rows, axis=1)
    _, idx = np.unique(packed, axis=0, return_index=True)
    return rows[np.sort(idx)]


def _mask_ints(rows: np.ndarray) -> np.ndarray:
    weights = np.left_shift(np.uint64(1), np.arange(rows.shape[1], dtype=np.uint64))
    return (rows.astype(np.uint64) * weights[None, :]).sum(axis=1, dtype=np.uint64)


def _require_parts(dec: WcDecomposition) -> None:
    dec.require_decomposable()


def _nonhit_fraction(counts: np.ndarray, d: int, w0: float, w1: float) -> float:
    """sum_k (C(d,k) - counts[k]) w0^k w1^(d-k) with w0 + w1 = 1."""
    if d <= 1000:
        return math.fsum(float(math.comb(d, k) - int(counts[k])) * (w0 ** k * w1 ** (d - k))
                         for k in range(d + 1))
    ks = np.arange(d + 1)
    logw = ks * math.log(w0) + (d - ks) * math.log(w1)
    return 1.0 - math.fsum(counts * np.exp(logw))


def certify_thm1(dec: WcDecomposition, ps: PointSet) -> Certificate:
    """Exact fooling bound for a worst-case function split into two parts."""
    _require_parts(dec)
    if dec.has_smooth_part:
        raise PreconditionError("this bound needs a worst-case function without smooth part")
    d = ps.d
    rows = _unique_rows(_expanded_low_masks(ps.nodes, dec.a))
    counts = np.bincount(rows.sum(axis=1), minlength=d + 1) if rows.size else np.zeros(d + 1, int)
    s = dec.I0 + dec.I1
    bn = _clip01(_nonhit_fraction(counts, d, dec.I0 / s, dec.I1 / s))
    return Certificate(bn * dec.initial_error_1d ** d, bn, CertTheorem.THM1_EXACT, ps.n, d,
                       {"alpha": dec.alpha, "I0": dec.I0, "I1": dec.I1})


def _hits(nodes: np.ndarray, a: float, low_sets: np.ndarray) -> np.ndarray:
    """For each quadrant (rows of ``low_sets``), does some node lie in it?"""
    if nodes.shape[0] == 0:
        return np.zeros(low_sets.shape[0], dtype=bool)
    le = nodes <= a
    ge = nodes >= a
    ok = np.where(low_sets[:, None, :], le[None, :, :], ge[None, :, :])
    return np.any(np.all(ok, axis=2), axis=1)


def brute_force_thm1(dec: WcDecomposition, ps: PointSet) -> Certificate:
    """Same bound as :func:`certify_thm1` by enumerating all 2^d quadrants."""
    _require_parts(dec)
    if dec.has_smooth_part:
        raise PreconditionError("this bound needs a worst-case function without smooth part")
    d = ps.d
    if d > MAX_SUBSET_DIM:
        raise BudgetExceededError(f"brute force enumeration refuses d={d} > {MAX_SUBSET_DIM}")
    s = dec.I0 + dec.I1
    w0, w1 = dec.I0 / s, dec.I1 / s
    terms = []
    bits = np.arange(d)
    for start in range(0, 1 << d, 4096):
        us = np.arange(start, min(start + 4096, 1 << d))
        low = (us[:, None] >> bits[None, :]) & 1 == 1
        size = low.sum(axis=1)
        free = ~_hits(ps.nodes, dec.a, low)
        terms.extend(w0 ** k * w1 ** (d - k) for k in size[free])
    bn = _clip01(math.fsum(terms))
    return Certificate(bn * dec.initial_error_1d ** d, bn, CertTheorem.THM1_EXACT, ps.n, d,
                       {"alpha": dec.alpha, "I0": dec.I0, "I1": dec.I1})


def _log_binom(d: int, k: np.ndarray) -> np.ndarray:
    return gammaln(d + 1) - gammaln(k + 1) - gammaln(d - k + 1)


def closed_form_thm1(alpha: float, N: int, d: int) -> float:
    """(1 - N alpha^d)_+."""
    if not 0.5 <= alpha < 1:
        raise PreconditionError(f"alpha must lie in [1/2, 1), got {alpha}")
    if N < 0 or d < 1:
        raise PreconditionError("need N >= 0 and d >= 1")
    if N == 0:
        return 1.0
    ad = alpha ** d
    x = N * ad if ad > 1e-300 else math.exp(math.log(N) + d * math.log(alpha))
    return max(0.0, 1.0 - x)


def certify_thm3(dec: WcDecomposition, ps: PointSet) -> Certificate:
    """Exact fooling bound for a worst-case function with a smooth part."""
    _require_parts(dec)
    if not dec.I_smooth > 0:
        raise PreconditionError("this bound needs a smooth part with positive integral")
    d = ps.d
    if d > MAX_SUBSET_DIM:
        raise BudgetExceededError(
            f"exact subset enumeration refuses d={d} > {MAX_SUBSET_DIM}; use closed_form_thm3")
    rows = _unique_rows(_expanded_low_masks(ps.nodes, dec.a))
    masks = np.ascontiguousarray(_mask_ints(rows)) if rows.size else np.zeros(0, dtype=np.uint64)
    total = dec.I_smooth + dec.I0 + dec.I1
    bn = _clip01(kernels.subset_nonhit_sum(
        masks, d, dec.I_smooth / total, dec.I0 / total, dec.I1 / total))
    return Certificate(bn * dec.initial_error_1d ** d, bn, CertTheorem.THM3_EXACT, ps.n, d,
                       {"alpha": dec.alpha, "alpha1": dec.alpha1, "alpha3": dec.alpha3,
                        "I0": dec.I0, "I1": dec.I1})


def closed_form_thm3(alpha: float, alpha3: float, N: int, d: int,
                     log_n: float | None = None) -> float:
    """(1 + alpha3)^-d sum_k C(d, k) alpha3^k (1 - N alpha^k)_+.

    Passing ``log_n`` instead of a huge ``N`` evaluates the sum with
    N = exp(log_n), which may be fractional.
    """
    if not 0.5 <= alpha < 1:
        raise PreconditionError(f"alpha must lie in [1/2, 1), got {alpha}")
    if not alpha3 > 0:
        raise PreconditionError("alpha3 must be positive")
    if d < 1 or (log_n is None and N < 0):
        raise PreconditionError("need N >= 0 and d >= 1")
    if log_n is not None:
        k = np.arange(d + 1, dtype=float)
        logw = _log_binom(d, k) + k * math.log(alpha3) - d * math.log1p(alpha3)
        keep = -np.expm1(np.minimum(log_n + k * math.log(alpha), 0.0))
        return _clip01(math.fsum(np.exp(logw) * keep))
    if d <= 64:
        pk = alpha3 / (1.0 + alpha3)
        qk = 1.0 / (1.0 + alpha3)
        terms = []
        for k in range(d + 1):
            keep = 1.0 if N == 0 else max(0.0, 1.0 - N * alpha ** k)
            terms.append(math.comb(d, k) * pk ** k * qk ** (d - k) * keep)
        return _clip01(math.fsum(terms))
    k = np.arange(d + 1, dtype=float)
    logw = _log_binom(d, k) + k * math.log(alpha3) - d * math.log1p(alpha3)
    if N == 0:
        keep = np.ones_like(k)
    else:
        keep = -np.expm1(np.minimum(math.log(N) + k * math.log(alpha), 0.0))
    return _clip01(math.fsum(np.exp(logw) * keep))


def alpha_tail_ratio(alpha3: float, c: float, d: int) -> float:
    """sum_{k <= floor(c d)} C(d, k) alpha3^k / (1 + alpha3)^d, in log space."""
    if not alpha3 > 0:
        raise PreconditionError("alpha3 must be positive")
    if not 0 < c < alpha3 / (1 + alpha3):
        raise PreconditionError(f"c must lie in (0, alpha3/(1+alpha3)) = (0, {alpha3 / (1 + alpha3)})")
    if d < 1:
        raise PreconditionError("d must be >= 1")
    kmax = math.floor(c * d)
    if d <= 256:
        a3 = Fraction(alpha3)
        exact = sum(math.comb(d, k) * a3 ** k for k in range(kmax + 1)) / (1 + a3) ** d
        return float(exact)
    k = np.arange(kmax + 1, dtype=float)
    logw = _log_binom(d, k) + k * math.log(alpha3) - d * math.log1p(alpha3)
    return float(math.exp(logsumexp(logw)))


def curse_rate_thm3(alpha: float, alpha3: float) -> float:
    """Right end of the admissible interval for C: alpha^(-alpha3/(1+alpha3))."""
    return alpha ** (-alpha3 / (1.0 + alpha3))


class Theorem(str, enum.Enum):
    THM1 = "1"
    THM3 = "3"
    THM5 = "5"


DEFAULT_SAFETY = 1e-6


def curse_constant(theorem, constants: Mapping[str, float], delta: float = DEFAULT_SAFETY) -> float:
    """Base of the exponential lower bound on the information complexity."""
    theorem = Theorem(theorem)
    if theorem is Theorem.THM1:
        alpha = constants["alpha"]
        if not 0.5 <= alpha < 1:
            raise PreconditionError(f"alpha must lie in [1/2, 1), got {alpha}")
        return 1.0 / alpha
    if theorem is Theorem.THM3:
        if not 0 < delta < 1:
            raise PreconditionError("safety factor delta must lie in (0, 1)")
        return curse_rate_thm3(constants["alpha"], constants["alpha3"]) * (1.0 - delta)
    c = constants["c_tilde"]
    if not c > 1:
        raise PreconditionError("c_tilde must exceed 1")
    return c


def info_complexity_bound(theorem, constants: Mapping[str, float], eps: float, d: int,
                          delta: float = DEFAULT_SAFETY) -> int:
    """Lower bound on N(eps, d), rounded up to an integer with exact arithmetic.

    Theorem 1: (1/alpha)^d (1 - eps). Theorem 3: floor(C^d) with
    C = alpha^(-alpha3/(1+alpha3)) (1 - delta); this one only holds for d beyond
    an unquantified threshold. Theorem 5 (nonnegative weights):
    c_tilde^d (1 - 2 eps).
    """
    theorem = Theorem(theorem)
    if d < 1:
        raise PreconditionError("d must be >= 1")
    if theorem is Theorem.THM5:
        if not 0 < eps < 0.5:
            raise PreconditionError("eps must lie in (0, 1/2) for nonnegative-weight bounds")
    elif not 0 < eps < 1:
        raise PreconditionError("eps must lie in (0, 1)")
    C = Fraction(curse_constant(theorem, constants, delta))
    if theorem is Theorem.THM1:
        x = C ** d * (1 - Fraction(eps))
    elif theorem is Theorem.THM3:
        return math.floor(C ** d)
    else:
        x = C ** d * (1 - 2 * Fraction(eps))
    return math.ceil(x)
