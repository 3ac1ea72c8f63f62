"""Lower bounds for quadrature rules with nonnegative weights.

A majorant family assigns to every y a function s_y >= 0 with s_y(y) = h1(y).
With alpha = max_y ||s_y|| < ||h1|| and beta = max_y I(s_y) < I(h1), the
product majorant f* = sum_i prod_j s_{x_ij} shows that every nonnegative rule
with N nodes has error at least

    (I(h1)^d - N beta^d)_+ / (2 max(||h1||^d, N alpha^d)),

so N^+(eps, d) >= c_tilde^d (1 - 2 eps) with c_tilde = min(||h1||/alpha, I(h1)/beta).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import numerics
from .errors import PreconditionError
from .fooling import Certificate, CertTheorem
from .spaces import WcDecomposition

SLACK = 1e-10


class InvalidFamilyError(PreconditionError):
    """The majorant family does not shrink both the norm and the integral."""


class DecompositionPropertyError(PreconditionError):
    """A decomposition misses one of the properties the nonnegative-rule bound needs.

    ``prop`` is one of ``"nonnegative-parts"``, ``"positive-integrals"``,
    ``"norm-reduction"``.
    """

    def __init__(self, prop: str, message: str):
        super().__init__(f"{prop}: {message}")
        self.prop = prop


@dataclass(frozen=True)
class SplineFamily:
    evaluate: Callable[[float, np.ndarray], np.ndarray]
    norm_of: Callable[[float], float]
    integral_of: Callable[[float], float]
    domain: tuple[float, float]
    h1_at: Callable[[float], float]
    norm_h1: float
    I_h1: float

    def check(self, n: int = 201) -> None:
        """Nonnegativity and interpolation on an n x n grid."""
        lo, hi = self.domain
        ys = np.linspace(lo, hi, n)
        xs = np.linspace(lo, hi, n)
        for y in ys:
            v = np.asarray(self.evaluate(float(y), xs), dtype=float)
            if np.min(v) < -SLACK:
                raise InvalidFamilyError(f"s_y takes the negative value {np.min(v)!r} at y={y}")
            gap = abs(float(self.evaluate(float(y), np.array([y]))[0]) - self.h1_at(float(y)))
            if gap > SLACK:
                raise InvalidFamilyError(f"s_y(y) differs from h1(y) by {gap!r} at y={y}")


@dataclass(frozen=True)
class PositiveConstants:
    alpha: float
    beta: float
    norm_h1: float
    I_h1: float
    params: Mapping[str, float] = field(default_factory=dict)
    # relative margin demanded of numerically maximized alpha, beta; 0 for closed forms
    slack: float = SLACK

    def __post_init__(self):
        if not self.alpha < self.norm_h1 * (1.0 - self.slack):
            raise InvalidFamilyError(
                f"majorant norm alpha={self.alpha!r} is not below ||h1||={self.norm_h1!r}")
        if not self.beta < self.I_h1 * (1.0 - self.slack):
            raise InvalidFamilyError(
                f"majorant integral beta={self.beta!r} is not below I(h1)={self.I_h1!r}")

    @property
    def c_tilde(self) -> float:
        return min(self.norm_h1 / self.alpha, self.I_h1 / self.beta)

    def as_dict(self) -> dict[str, float]:
        out = {"alpha": self.alpha, "beta": self.beta, "norm_h1": self.norm_h1,
               "I_h1": self.I_h1, "c_tilde": self.c_tilde}
        out.update(self.params)
        return out


def family_maxima(fam: SplineFamily, grid_points: int = 2001) -> tuple[float, float]:
    """(max_y ||s_y||, max_y I(s_y)) by numerical maximization, without validation."""
    lo, hi = fam.domain
    alpha = numerics.maximize_1d(np.vectorize(fam.norm_of), lo, hi, grid_points).value
    beta = numerics.maximize_1d(np.vectorize(fam.integral_of), lo, hi, grid_points).value
    return alpha, beta


def constants_from_family(fam: SplineFamily, grid_points: int = 2001) -> PositiveConstants:
    """Validated constants of a majorant family."""
    fam.check()
    alpha, beta = family_maxima(fam, grid_points)
    return PositiveConstants(alpha, beta, fam.norm_h1, fam.I_h1)


# --- polynomials of degree <= 2 --------------------------------------------

def _require_finite_q(q: float) -> float:
    q = float(q)
    if not q > 1:
        raise PreconditionError(f"q must exceed 1, got {q}")
    if q == math.inf:
        raise PreconditionError("nonnegative-rule constants are not available for q = inf")
    return q


def p2_norm_bound(c: float, q: float) -> float:
    """Uniform upper bound on ||1 - c (y - x)^2||_q over y in [0, 1]."""
    return (1.0 - c / 12.0 + (2.0 * c) ** q * (q + 2.0) / (q + 1.0)) ** (1.0 / q)


def p2_norm_quad(c: float, q: float, y: float) -> float:
    """||1 - c (y - x)^2||_q with the L_q part by quadrature, derivatives exact."""
    lq = numerics.integrate_piecewise(lambda x: np.abs(1.0 - c * (y - x) ** 2) ** q,
                                      sorted({0.0, y, 1.0}))
    d1 = (2.0 * c) ** q * (y ** (q + 1) + (1.0 - y) ** (q + 1)) / (q + 1)
    d2 = (2.0 * c) ** q
    return (lq + d1 + d2) ** (1.0 / q)


def p2_family(c: float, q: float, norm_mode: str = "bound") -> SplineFamily:
    """s_y(x) = 1 - c (y - x)^2 majorizing h1 = 1."""
    q = _require_finite_q(q)
    if not 0 < c < 0.5:
        raise PreconditionError(f"c must lie in (0, 1/2), got {c}")
    if norm_mode == "bound":
        nb = p2_norm_bound(c, q)

        def norm_of(y):
            return nb
    elif norm_mode == "quad":
        def norm_of(y):
            return p2_norm_quad(c, q, float(y))
    else:
        raise PreconditionError(f"unknown norm_mode {norm_mode!r}")

    def evaluate(y, x):
        return 1.0 - c * (y - np.asarray(x, dtype=float)) ** 2

    def integral_of(y):
        return 1.0 - c * (y * y - y + 1.0 / 3.0)

    return SplineFamily(evaluate=evaluate, norm_of=norm_of, integral_of=integral_of,
                        domain=(0.0, 1.0), h1_at=lambda y: 1.0, norm_h1=1.0, I_h1=1.0)


def p2_u(q: float) -> float:
    """Largest c for which the uniform norm bound stays below 1."""
    q = _require_finite_q(q)
    return math.exp((math.log((q + 1) / (q + 2)) - math.log(12.0) - q * math.log(2.0)) / (q - 1))


def p2_c_star(q: float) -> float:
    q = _require_finite_q(q)
    return p2_u(q) / q ** (1.0 / (q - 1))


def ctilde_of_c(c: float, q: float) -> float:
    """min(1/alpha, 1/beta) for the family with parameter c, alpha from the uniform bound."""
    q = float(q)
    return min(1.0 / p2_norm_bound(c, q), 1.0 / (1.0 - c / 12.0))


def p2_ctilde_closed_form(q: float) -> float:
    q = _require_finite_q(q)
    u = p2_u(q)
    lq = math.log(q)
    big = math.exp(q * math.log(2.0) + q * math.log(u) - q / (q - 1) * lq) * (q + 2) / (q + 1)
    return (1.0 - u / (12.0 * math.exp(lq / (q - 1))) + big) ** (-1.0 / q)


def p2_constants(q: float) -> PositiveConstants:
    """Constants of the optimal member c* of the degree-2 family."""
    q = _require_finite_q(q)
    c = p2_c_star(q)
    alpha, beta = p2_norm_bound(c, q), 1.0 - c / 12.0
    if not (alpha < 1.0 and beta < 1.0):
        raise PreconditionError(
            f"q={q} is too close to 1: c*={c!r} and the constant rounds to 1 in double precision")
    return PositiveConstants(alpha=alpha, beta=beta, norm_h1=1.0, I_h1=1.0,
                             params={"c": c, "u_q": p2_u(q), "q": q}, slack=0.0)


# --- decomposition route ----------------------------------------------------

def _grid_over(dec: WcDecomposition, n: int = 2001) -> np.ndarray:
    lo, hi = dec.domain
    lo = max(lo, -numerics.DEFAULT_SETTINGS.tail_cutoff)
    hi = min(hi, numerics.DEFAULT_SETTINGS.tail_cutoff)
    return np.union1d(np.linspace(lo, hi, n), [dec.a])


def dp_plus_family(dec: WcDecomposition) -> SplineFamily:
    """s_y = smooth part + the one-sided part on y's side of the split point."""
    a = dec.a

    def evaluate(y, x):
        side = dec.h1_part0 if y <= a else dec.h1_part1
        return dec.h1_smooth(x) + side(x)

    def norm_of(y):
        return dec.norm_of(1.0, 1.0, 0.0) if y <= a else dec.norm_of(1.0, 0.0, 1.0)

    def integral_of(y):
        return dec.I_smooth + (dec.I0 if y <= a else dec.I1)

    def h1_at(y):
        return float(np.asarray(dec.h1(np.array([y])))[0])

    lo, hi = dec.domain
    t = numerics.DEFAULT_SETTINGS.tail_cutoff
    return SplineFamily(evaluate=evaluate, norm_of=norm_of, integral_of=integral_of,
                        domain=(max(lo, -t), min(hi, t)), h1_at=h1_at,
                        norm_h1=dec.norm_h1, I_h1=dec.I_h1)


def dp_plus_constants(dec: WcDecomposition, q: float | None = None) -> PositiveConstants:
    """Constants from a decomposition into a smooth part and two one-sided parts."""
    q = _require_finite_q(dec.q if q is None else q)
    if abs(q - dec.q) > 1e-12 * q:
        raise PreconditionError(f"q={q} does not match the decomposition (q={dec.q})")
    xs = _grid_over(dec)
    for name, f in (("smooth", dec.h1_smooth), ("left", dec.h1_part0), ("right", dec.h1_part1)):
        m = float(np.min(f(xs)))
        if m < -SLACK:
            raise DecompositionPropertyError(
                "nonnegative-parts", f"{name} part takes the value {m!r}")
    if not (dec.I0 > 0 and dec.I1 > 0):
        raise DecompositionPropertyError(
            "positive-integrals", f"one-sided integrals are {dec.I0!r} and {dec.I1!r}")
    alpha = max(dec.norm_of(1.0, 1.0, 0.0), dec.norm_of(1.0, 0.0, 1.0))
    if not alpha < dec.norm_h1 * (1.0 - SLACK):
        raise DecompositionPropertyError(
            "norm-reduction", f"alpha={alpha!r} is not below ||h1||={dec.norm_h1!r}")
    beta = dec.I_smooth + max(dec.I0, dec.I1)
    return PositiveConstants(alpha, beta, dec.norm_h1, dec.I_h1)


def cp_closed_form(p: float, a: float) -> float:
    """Nonnegative-rule constant of W^1_q without anchor condition."""
    if not p > 1:
        raise PreconditionError("p must exceed 1")
    A, B = a ** (p + 1), (1 - a) ** (p + 1)
    q = p / (p - 1)
    return ((p + 1 + A + B) / (p + 1 + max(A, B))) ** (1.0 / q)


# --- the bound --------------------------------------------------------------

def positive_rule_bound(consts: PositiveConstants, N: int, d: int) -> Certificate:
    """Error lower bound valid for every rule with N nodes and nonnegative weights."""
    if N < 0 or d < 1:
        raise PreconditionError("need N >= 0 and d >= 1")
    # normalized by e(0,d) = (I/||h1||)^d:  (1 - N (beta/I)^d)_+ / (2 max(1, N (alpha/||h1||)^d))
    if N == 0:
        bn = 0.5
    else:
        lb = math.log(N) + d * math.log(consts.beta / consts.I_h1)
        la = math.log(N) + d * math.log(consts.alpha / consts.norm_h1)
        num = -math.expm1(lb) if lb < 0 else 0.0
        bn = num / (2.0 * math.exp(max(0.0, la)))
    e0 = math.exp(d * math.log(consts.I_h1 / consts.norm_h1))
    return Certificate(bn * e0, bn, CertTheorem.THM5, N, d, consts.as_dict())
