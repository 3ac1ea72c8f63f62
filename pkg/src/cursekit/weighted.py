"""Density-weighted integration over the real line.

Functions on R with f^(j)(0) = 0 for j < r are normed by ||f^(r)||_q and
integrated against a symmetric probability density psi. The representer of
the integral is the kernel

    Psi_r(t) = int_t^inf (x - t)^(r-1) / (r-1)! psi(x) dx    (t >= 0),

extended by Psi_r(-t) = (-1)^r Psi_r(t). The worst-case function is the
r-fold iterated integral from 0 to |t| of Psi_r^(p-1).

Everything is evaluated on a fixed grid over [0, T]: cumulative moments of
psi give Psi_r at the grid nodes, and a monotone cubic interpolant of
Psi_r^(p-1) is integrated r times analytically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import numerics
from .errors import DivergenceError, PreconditionError
from .numerics import GK_KRONROD_WEIGHTS, GK_NODES, QuadSettings
from .spaces import WcDecomposition, holder_conjugate

GRID_POINTS = 4097
STABILITY_RTOL = 1e-3


def std_normal(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class WeightedSpec:
    r: int
    q: float
    density: Callable[[np.ndarray], np.ndarray] = std_normal
    density_name: str = "std-normal"

    def __post_init__(self):
        object.__setattr__(self, "q", float(self.q))
        if self.r < 1:
            raise PreconditionError("r must be >= 1")
        if not self.q > 1:
            raise PreconditionError("q must lie in (1, inf]")

    @property
    def p(self) -> float:
        return holder_conjugate(self.q)

    def validate(self, settings: QuadSettings | None = None) -> None:
        """Check symmetry and unit mass of the density on [-T, T]."""
        s = settings or numerics.DEFAULT_SETTINGS
        xs = np.linspace(0.0, s.tail_cutoff, 1001)
        if np.max(np.abs(self.density(xs) - self.density(-xs))) > 1e-12:
            raise PreconditionError(f"density {self.density_name!r} is not symmetric about 0")
        mass = numerics.integrate_real_line(self.density, s, breakpoints=[0.0])
        if abs(mass - 1.0) > 1e-8:
            raise PreconditionError(
                f"density {self.density_name!r} integrates to {mass!r} on [-T, T], not 1")


def psi_kernel(spec: WeightedSpec, t: float, settings: QuadSettings | None = None) -> float:
    """Psi_r(t) by direct adaptive quadrature over [|t|, T]."""
    s = settings or numerics.DEFAULT_SETTINGS
    r = spec.r
    u = abs(t)
    if u >= s.tail_cutoff:
        val = 0.0
    else:
        fac = math.factorial(r - 1)
        val = numerics.integrate(
            lambda x: (x - u) ** (r - 1) / fac * spec.density(x), u, s.tail_cutoff, s)
    return val if t >= 0 else (-1) ** r * val


def _psi_on_grid(spec: WeightedSpec, T: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Grid over [0, T] and Psi_r at its nodes via cumulative moments."""
    r = spec.r
    s = np.linspace(0.0, T, n)
    lo, hi = s[:-1], s[1:]
    half = 0.5 * (hi - lo)
    x = 0.5 * (hi + lo)[:, None] + half[:, None] * GK_NODES[None, :]
    dens = spec.density(x.ravel()).reshape(x.shape)
    psi = np.zeros(n)
    for i in range(r):
        cell = half * ((x ** i * dens) @ GK_KRONROD_WEIGHTS)
        # M_i(s_j) = int_{s_j}^T x^i psi(x) dx, summed from the right
        tail = np.concatenate([np.cumsum(cell[::-1])[::-1], [0.0]])
        psi += math.comb(r - 1, i) * (-s) ** (r - 1 - i) * tail
    psi /= math.factorial(r - 1)
    return s, np.clip(psi, 0.0, None)


@dataclass(frozen=True)
class _NestedGrid:
    grid: np.ndarray
    psi: np.ndarray
    h1_poly: object  # scipy PPoly
    deriv_poly: object

    def h1(self, t):
        return self.h1_poly(np.abs(np.asarray(t, dtype=float)))


def _nested(spec: WeightedSpec, T: float, n: int = GRID_POINTS) -> _NestedGrid:
    s, psi = _psi_on_grid(spec, T, n)
    g = psi ** (spec.p - 1.0)
    interp = PchipInterpolator(s, g, extrapolate=True)
    return _NestedGrid(grid=s, psi=psi, h1_poly=interp.antiderivative(spec.r), deriv_poly=interp)


def _weighted_mean(spec: WeightedSpec, nest: _NestedGrid, T: float, settings: QuadSettings) -> float:
    """int_0^T h1 psi."""
    return numerics.integrate(lambda t: nest.h1(t) * spec.density(t), 0.0, T, settings)


def check_condition(spec: WeightedSpec, settings: QuadSettings | None = None) -> float:
    """Truncated iterated integral that must be finite for the problem to make sense.

    Evaluated at cutoffs T and 2T; returns the value at T. Raises
    :class:`DivergenceError` when the relative change exceeds 1e-3.
    """
    s = settings or numerics.DEFAULT_SETTINGS
    scale = math.factorial(spec.r - 1) ** (spec.p - 1.0)
    vals = []
    for T in (s.tail_cutoff, 2.0 * s.tail_cutoff):
        nest = _nested(spec, T)
        vals.append(scale * _weighted_mean(spec, nest, T, s))
    v1, v2 = vals
    if not (math.isfinite(v1) and math.isfinite(v2)):
        raise DivergenceError("iterated kernel integral is not finite")
    change = abs(v2 - v1) / max(abs(v1), 1e-300)
    if change > STABILITY_RTOL:
        raise DivergenceError(
            f"iterated kernel integral is unstable under cutoff doubling: "
            f"{v1:.6g} at T={s.tail_cutoff:g}, {v2:.6g} at T={2 * s.tail_cutoff:g} "
            f"(growth x{v2 / v1 if v1 else math.inf:.3g})")
    return v1


def worst_case_function_weighted(spec: WeightedSpec,
                                 settings: QuadSettings | None = None) -> WcDecomposition:
    """Worst-case function over R with the split at 0 into left and right halves."""
    s = settings or numerics.DEFAULT_SETTINGS
    spec.validate(s)
    check_condition(spec, s)
    T = s.tail_cutoff
    nest = _nested(spec, T)
    q = spec.q

    def h1(t):
        return nest.h1(t)

    def part0(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= 0, nest.h1(t), 0.0)

    def part1(t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, nest.h1(t), 0.0)

    def zero(t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def deriv(t):
        # r-th derivative: Psi_r^(p-1) on the right, mirrored with sign (-1)^r on the left
        t = np.asarray(t, dtype=float)
        v = nest.deriv_poly(np.abs(t))
        return np.where(t < 0, (-1) ** spec.r * v, v)

    # h1 and psi are even, so both halves carry exactly half of the integral
    total = numerics.integrate_real_line(lambda t: nest.h1(t) * spec.density(t), s, [0.0])
    I0 = I1 = 0.5 * total
    g = nest.deriv_poly
    if q == math.inf:
        J = float(np.max(g(nest.grid)))

        def norm_of(cs, c0, c1):
            return max(abs(c0), abs(c1)) * J
    else:
        # |h1^(r)|^q = Psi_r^((p-1) q) = Psi_r^p on each half-line
        J = numerics.integrate(lambda t: np.abs(g(t)) ** q, 0.0, T, s)

        def norm_of(cs, c0, c1):
            return ((abs(c0) ** q + abs(c1) ** q) * J) ** (1.0 / q)

    norm = norm_of(0.0, 1.0, 1.0)
    return WcDecomposition(
        h1=h1, h1_part0=part0, h1_part1=part1, h1_smooth=zero,
        I0=I0, I1=I1, I_smooth=0.0, norm_h1=norm,
        initial_error_1d=(I0 + I1) / norm, a=0.0, q=q,
        domain=(-math.inf, math.inf), norm_of=norm_of, h1_deriv=deriv)
