"""Univariate function spaces on [0, 1] and their worst-case functions.

Three spaces are supported:

``anchored-sobolev``
    W^r_{a,q}: functions with f^(j)(a) = 0 for j < r, normed by ||f^(r)||_q.
``no-anchor-sobolev``
    W^1_q with norm (|f(a)|^q + ||f'||_q^q)^(1/q).
``poly2``
    Polynomials of degree <= 2 with norm (||f||_q^q + ||f'||_q^q + ||f''||_q^q)^(1/q).

For each, :func:`worst_case_function` returns a :class:`WcDecomposition`
bundling the worst-case function, its split into a smooth part and two
one-sided parts, their integrals, and the ratios that drive the lower bounds.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import numerics
from .errors import NoDecomposablePartError, PreconditionError

Func = Callable[[np.ndarray], np.ndarray]


class SpaceKind(str, enum.Enum):
    ANCHORED_SOBOLEV = "anchored-sobolev"
    NO_ANCHOR_SOBOLEV = "no-anchor-sobolev"
    POLY2 = "poly2"


def holder_conjugate(q: float) -> float:
    """p with 1/p + 1/q = 1; maps inf to 1 and 1 to inf."""
    if q == math.inf:
        return 1.0
    if q == 1:
        return math.inf
    return q / (q - 1.0)


@dataclass(frozen=True)
class SpaceSpec:
    kind: SpaceKind
    r: int = 1
    q: float = 2.0
    a: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", SpaceKind(self.kind))
        object.__setattr__(self, "q", float(self.q))
        if not (self.q > 1):
            raise PreconditionError(f"q must lie in (1, inf], got {self.q}")
        if self.r < 1:
            raise PreconditionError("smoothness r must be >= 1")
        if self.kind is SpaceKind.NO_ANCHOR_SOBOLEV and self.r != 1:
            raise PreconditionError("no-anchor-sobolev is only defined for r = 1")
        if self.kind is not SpaceKind.POLY2 and not 0 < self.a < 1:
            raise PreconditionError(f"anchor a must lie in (0, 1), got {self.a}")

    @property
    def p(self) -> float:
        return holder_conjugate(self.q)

    @classmethod
    def from_p(cls, kind, p: float, r: int = 1, a: float = 0.5) -> "SpaceSpec":
        """Build a spec from the Hoelder conjugate ``p`` (p = 1 means q = inf)."""
        if not p >= 1:
            raise PreconditionError("p must be >= 1")
        return cls(kind=kind, r=r, q=holder_conjugate(p), a=a)


@dataclass(frozen=True)
class WcDecomposition:
    """Worst-case function h1 = h1_smooth + h1_part0 + h1_part1.

    ``h1_part0`` lives on the left of ``a`` and ``h1_part1`` on the right.
    ``norm_of(cs, c0, c1)`` is the space norm of
    ``cs*h1_smooth + c0*h1_part0 + c1*h1_part1``.
    """
    h1: Func
    h1_part0: Func
    h1_part1: Func
    h1_smooth: Func
    I0: float
    I1: float
    I_smooth: float
    norm_h1: float
    initial_error_1d: float
    a: float
    q: float
    domain: tuple[float, float]
    norm_of: Callable[[float, float, float], float] = field(repr=False)
    h1_deriv: Func | None = field(default=None, repr=False)

    @property
    def I_h1(self) -> float:
        return self.I_smooth + self.I0 + self.I1

    @property
    def decomposable(self) -> bool:
        return self.I0 > 0 and self.I1 > 0

    @property
    def alpha(self) -> float:
        if not self.decomposable:
            return math.nan
        return max(self.I0, self.I1) / (self.I0 + self.I1)

    @property
    def alpha1(self) -> float:
        return self.I_smooth

    @property
    def alpha2(self) -> float:
        return self.I0 + self.I1

    @property
    def alpha3(self) -> float:
        return self.alpha2 / self.alpha1 if self.alpha1 > 0 else math.inf

    @property
    def has_smooth_part(self) -> bool:
        return self.I_smooth != 0

    def require_decomposable(self) -> None:
        if not self.decomposable:
            raise NoDecomposablePartError(
                "worst-case function has no decomposable part (I0, I1 must be > 0)")


def _sup_abs(f: Func, lo: float, hi: float) -> float:
    res = numerics.maximize_1d(lambda x: np.abs(f(x)), lo, hi, grid_points=10_001)
    return res.value


def _lq_power(f: Func, lo: float, hi: float, q: float) -> float:
    """int_lo^hi |f|^q."""
    return numerics.integrate(lambda x: np.abs(f(x)) ** q, lo, hi)


# --- anchored Sobolev W^r_{a,q} -------------------------------------------

def _anchored_h1(r: int, p: float, a: float) -> tuple[Func, Func]:
    """Worst-case function and its r-th derivative."""
    R = r * p
    coef = (-1) ** (r + 1) / math.factorial(r) ** (p - 1)
    tail = [math.prod(R - i for i in range(j, r)) for j in range(r)]
    fact = [math.factorial(j) for j in range(r)]

    def h1(t):
        t = np.asarray(t, dtype=float)
        left = (a ** R - np.clip(t, 0, None) ** R) / tail[0]
        right = ((1 - a) ** R - np.clip(1 - t, 0, None) ** R) / tail[0]
        for j in range(1, r):
            left = left + (t - a) ** j * a ** (R - j) / (fact[j] * tail[j])
            right = right + (t - a) ** j * (1 - a) ** (R - j) * (-1) ** j / (fact[j] * tail[j])
        return coef * np.where(t < a, left, right)

    def h1_deriv(t):
        t = np.asarray(t, dtype=float)
        e = r * (p - 1)
        left = (-1) ** r * np.clip(t, 0, None) ** e
        right = np.clip(1 - t, 0, None) ** e
        return np.where(t < a, left, right) / math.factorial(r) ** (p - 1)

    return h1, h1_deriv


def anchored_part_integrals_closed_form(r: int, p: float, a: float) -> tuple[float, float]:
    """Closed-form integrals of the left and right parts of the anchored h1."""
    R = r * p
    denom = math.factorial(r) ** (p - 1) * math.prod(R - i for i in range(r))
    bracket = R / (R + 1) + sum(
        (-1) ** j / math.factorial(j + 1) * math.prod(R - i for i in range(j))
        for j in range(1, r))
    sign = (-1) ** (r + 1)
    return (sign * a ** (R + 1) / denom * bracket,
            sign * (1 - a) ** (R + 1) / denom * bracket)


def _anchored(spec: SpaceSpec) -> WcDecomposition:
    r, q, p, a = spec.r, spec.q, spec.p, spec.a
    h1, dh1 = _anchored_h1(r, p, a)

    def part0(x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= a, h1(x), 0.0)

    def part1(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= a, h1(x), 0.0)

    def zero(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    if r == 1:
        I0 = a ** (p + 1) / (p + 1)
        I1 = (1 - a) ** (p + 1) / (p + 1)
    else:
        I0 = numerics.integrate(h1, 0.0, a)
        I1 = numerics.integrate(h1, a, 1.0)
    if not (I0 > 0 and I1 > 0):
        raise PreconditionError(
            f"part integrals must be positive, got I0={I0!r}, I1={I1!r} (r={r}, p={p})")

    if q == math.inf:
        s0, s1 = _sup_abs(dh1, 0.0, a), _sup_abs(dh1, a, 1.0)

        def norm_of(cs, c0, c1):
            return max(abs(c0) * s0, abs(c1) * s1)
    else:
        J0, J1 = _lq_power(dh1, 0.0, a, q), _lq_power(dh1, a, 1.0, q)

        def norm_of(cs, c0, c1):
            return (abs(c0) ** q * J0 + abs(c1) ** q * J1) ** (1.0 / q)

    norm = norm_of(0.0, 1.0, 1.0)
    return WcDecomposition(
        h1=h1, h1_part0=part0, h1_part1=part1, h1_smooth=zero,
        I0=I0, I1=I1, I_smooth=0.0, norm_h1=norm,
        initial_error_1d=(I0 + I1) / norm, a=a, q=q, domain=(0.0, 1.0),
        norm_of=norm_of, h1_deriv=dh1)


# --- W^1_q without anchor condition ----------------------------------------

def _no_anchor(spec: SpaceSpec) -> WcDecomposition:
    q, p, a = spec.q, spec.p, spec.a

    def part0(x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= a, (a ** p - np.clip(x, 0, None) ** p) / p, 0.0)

    def part1(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= a, ((1 - a) ** p - np.clip(1 - x, 0, None) ** p) / p, 0.0)

    def d0(x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= a, -np.clip(x, 0, None) ** (p - 1), 0.0)

    def d1(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= a, np.clip(1 - x, 0, None) ** (p - 1), 0.0)

    def one(x):
        return np.ones_like(np.asarray(x, dtype=float))

    def h1(x):
        return 1.0 + part0(x) + part1(x)

    def dh1(x):
        return d0(x) + d1(x)

    I0 = a ** (p + 1) / (p + 1)
    I1 = (1 - a) ** (p + 1) / (p + 1)
    if q == math.inf:
        s0, s1 = _sup_abs(d0, 0.0, a), _sup_abs(d1, a, 1.0)

        def norm_of(cs, c0, c1):
            return max(abs(cs), abs(c0) * s0, abs(c1) * s1)
    else:
        J0, J1 = _lq_power(d0, 0.0, a, q), _lq_power(d1, a, 1.0, q)

        def norm_of(cs, c0, c1):
            # parts vanish at a, so only the smooth part contributes |f(a)|
            return (abs(cs) ** q + abs(c0) ** q * J0 + abs(c1) ** q * J1) ** (1.0 / q)

    norm = norm_of(1.0, 1.0, 1.0)
    return WcDecomposition(
        h1=h1, h1_part0=part0, h1_part1=part1, h1_smooth=one,
        I0=I0, I1=I1, I_smooth=1.0, norm_h1=norm,
        initial_error_1d=(1.0 + I0 + I1) / norm, a=a, q=q, domain=(0.0, 1.0),
        norm_of=norm_of, h1_deriv=dh1)


# --- P2 ---------------------------------------------------------------------

def _poly2(spec: SpaceSpec) -> WcDecomposition:
    def one(x):
        return np.ones_like(np.asarray(x, dtype=float))

    def zero(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def norm_of(cs, c0, c1):
        return abs(cs)

    return WcDecomposition(
        h1=one, h1_part0=zero, h1_part1=zero, h1_smooth=one,
        I0=0.0, I1=0.0, I_smooth=1.0, norm_h1=1.0, initial_error_1d=1.0,
        a=spec.a, q=spec.q, domain=(0.0, 1.0), norm_of=norm_of, h1_deriv=zero)


@functools.lru_cache(maxsize=128)
def worst_case_function(spec: SpaceSpec) -> WcDecomposition:
    """Worst-case function of integration on the univariate space ``spec``."""
    if spec.kind is SpaceKind.ANCHORED_SOBOLEV:
        return _anchored(spec)
    if spec.kind is SpaceKind.NO_ANCHOR_SOBOLEV:
        return _no_anchor(spec)
    return _poly2(spec)


def inv_alpha_closed_form(spec: SpaceSpec) -> float:
    """1/alpha = 1 + (1/max(a, 1-a) - 1)^(r p + 1) for the anchored space."""
    if spec.kind is not SpaceKind.ANCHORED_SOBOLEV:
        raise PreconditionError("closed form 1/alpha is only defined for anchored-sobolev")
    a = spec.a
    return 1.0 + (1.0 / max(a, 1.0 - a) - 1.0) ** (spec.r * spec.p + 1)


def initial_error(spec: SpaceSpec, d: int) -> float:
    """e(0, d) = e(0, 1)^d."""
    if d < 1:
        raise PreconditionError("d must be >= 1")
    return worst_case_function(spec).initial_error_1d ** d


# --- q-property -------------------------------------------------------------

def _fd_derivative(f: Func, x: np.ndarray, order: int, lo: float, hi: float,
                   step: float) -> np.ndarray:
    """Finite-difference derivative whose stencil stays inside [lo, hi]."""
    if order == 0:
        return np.asarray(f(x), dtype=float)
    m = order + 3
    h = min(step, (hi - lo) / (m - 1))
    centre = (m - 1) / 2.0
    # shift so that every stencil point lies in [lo, hi]
    shift = np.clip(centre, (x - hi) / h + (m - 1), (x - lo) / h)
    offs = (np.arange(m)[None, :] - shift[:, None])  # in units of h
    V = offs[:, None, :] ** np.arange(m)[None, :, None]  # (n, power, node)
    rhs = np.zeros((len(x), m))
    rhs[:, order] = math.factorial(order)
    w = np.linalg.solve(V, rhs[:, :, None])[:, :, 0]
    pts = x[:, None] + offs * h
    vals = np.asarray(f(pts.ravel()), dtype=float).reshape(pts.shape)
    return np.sum(w * vals, axis=1) / h ** order


def check_q_property(f: Func, g: Func, supp_f: tuple[float, float], supp_g: tuple[float, float],
                     q: float, deriv_order: int = 1, step: float = 1e-4) -> float:
    """Defect of the q-property for two disjointly supported functions.

    Returns ``| ||f+g||^q - ||f||^q - ||g||^q |`` (or the max-variant for
    q = inf), where ``||.||`` is the L_q norm of the ``deriv_order``-th
    derivative over the hull of both supports.
    """
    lo_f, hi_f = supp_f
    lo_g, hi_g = supp_g
    if max(lo_f, lo_g) < min(hi_f, hi_g):
        raise PreconditionError("supports overlap on a set of positive measure")
    cuts = sorted({lo_f, hi_f, lo_g, hi_g})
    pieces = [(x, y) for x, y in zip(cuts[:-1], cuts[1:]) if y > x]
    fs, gs = numerics.as_vectorized(f), numerics.as_vectorized(g)

    def fg(x):
        return fs(x) + gs(x)

    def norm(h):
        parts = []
        for x, y in pieces:
            def deriv(t, x=x, y=y):
                return _fd_derivative(h, np.atleast_1d(np.asarray(t, dtype=float)),
                                      deriv_order, x, y, step)
            if q == math.inf:
                parts.append(_sup_abs(deriv, x, y))
            else:
                parts.append(numerics.integrate(lambda t: np.abs(deriv(t)) ** q, x, y))
        return max(parts) if q == math.inf else math.fsum(parts)

    nf, ng, nfg = norm(fs), norm(gs), norm(fg)
    if q == math.inf:
        return abs(nfg - max(nf, ng))
    return abs(nfg - nf - ng)
