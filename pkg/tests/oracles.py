"""Independent reference implementations used only by the tests.

They follow the defining formulas literally and share no code with the
package beyond the public data types.
"""
import itertools
import math

import numpy as np
from scipy import integrate as sint


def quadrant_nonhit_literal(nodes, a, w_smooth, w0, w1):
    """sum over u, v subset of u of w_smooth^(d-|u|) w0^|v| w1^(|u|-|v|) [no node in Q(u, v)].

    Q(u, v) constrains coordinates in v to x <= a and coordinates in u \\ v to x >= a;
    coordinates outside u are free. Weights are used as given.
    """
    nodes = np.asarray(nodes, dtype=float)
    d = nodes.shape[1]
    total = 0.0
    for usize in range(d + 1):
        for u in itertools.combinations(range(d), usize):
            for vsize in range(usize + 1):
                for v in itertools.combinations(u, vsize):
                    ok = np.ones(nodes.shape[0], dtype=bool)
                    for j in u:
                        ok &= nodes[:, j] <= a if j in v else nodes[:, j] >= a
                    if not ok.any():
                        total += w_smooth ** (d - usize) * w0 ** vsize * w1 ** (usize - vsize)
    return total


def local_disc_1d(nodes, t, a, quadrant):
    y = np.asarray(nodes, dtype=float).ravel()
    N = len(y)
    if quadrant:
        inside = (y < t) if t < a else (y >= t)
        vol = t if t < a else 1 - t
    else:
        lo, hi = min(t, a), max(t, a)
        inside = (y >= lo) & (y < hi)
        vol = hi - lo
    return (inside.sum() / N if N else 0.0) - vol


def disc_power_1d(nodes, a, p, quadrant):
    """int_0^1 |local discrepancy|^p dt by adaptive quadrature with node breakpoints."""
    pts = sorted({0.0, a, 1.0, *map(float, np.ravel(nodes))})
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi > lo:
            v, _ = sint.quad(lambda t: abs(local_disc_1d(nodes, t, a, quadrant)) ** p, lo, hi,
                             epsabs=1e-14, epsrel=1e-13, limit=200)
            total += v
    return total


def disc_power_2d(nodes, a, p, quadrant):
    """Nested adaptive quadrature over [0,1]^2 with node and anchor breakpoints."""
    nodes = np.asarray(nodes, dtype=float)
    N = nodes.shape[0]

    def local(t1, t2):
        t = (t1, t2)
        inside = np.ones(N, dtype=bool)
        vol = 1.0
        for j in range(2):
            y = nodes[:, j]
            if quadrant:
                inside &= (y < t[j]) if t[j] < a else (y >= t[j])
                vol *= t[j] if t[j] < a else 1 - t[j]
            else:
                lo, hi = min(t[j], a), max(t[j], a)
                inside &= (y >= lo) & (y < hi)
                vol *= hi - lo
        return (inside.sum() / N if N else 0.0) - vol

    def cuts(j):
        return sorted({0.0, a, 1.0, *map(float, nodes[:, j])})

    c1, c2 = cuts(0), cuts(1)

    def inner(t1):
        s = 0.0
        for lo, hi in zip(c2[:-1], c2[1:]):
            if hi > lo:
                s += sint.quad(lambda t2: abs(local(t1, t2)) ** p, lo, hi,
                               epsabs=1e-13, epsrel=1e-11, limit=200)[0]
        return s

    total = 0.0
    for lo, hi in zip(c1[:-1], c1[1:]):
        if hi > lo:
            total += sint.quad(inner, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=200)[0]
    return total


def binomial_tail_fraction(alpha3, c, d):
    from fractions import Fraction
    a3 = Fraction(alpha3)
    return float(sum(math.comb(d, k) * a3 ** k for k in range(math.floor(c * d) + 1))
                 / (1 + a3) ** d)
