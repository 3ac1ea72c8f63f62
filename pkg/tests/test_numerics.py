import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cursekit import numerics
from cursekit.errors import IntegrationError, PreconditionError
from cursekit.numerics import QuadSettings


def test_integrate_smooth():
    assert numerics.integrate(np.sin, 0, math.pi) == pytest.approx(2.0, abs=1e-13)
    assert numerics.integrate(np.exp, -1, 2) == pytest.approx(math.e ** 2 - math.exp(-1), rel=1e-13)


def test_integrate_endpoint_singularity():
    # int_0^1 x^-1/2 = 2
    assert numerics.integrate(lambda x: x ** -0.5, 0, 1) == pytest.approx(2.0, rel=1e-8)


def test_integrate_scalar_only_callable():
    assert numerics.integrate(lambda x: math.cos(x), 0, 1) == pytest.approx(math.sin(1), rel=1e-13)


def test_integrate_empty_and_reversed():
    assert numerics.integrate(np.sin, 1, 1) == 0.0
    with pytest.raises(PreconditionError):
        numerics.integrate(np.sin, 1, 0)


def test_integrate_budget_exhausted_carries_estimate():
    s = QuadSettings(abs_tol=1e-15, rel_tol=0, max_subdivisions=3)
    with pytest.raises(IntegrationError) as info:
        numerics.integrate(lambda x: np.abs(np.sin(40 * x)), 0, 3, s)
    assert math.isfinite(info.value.estimate) and info.value.residual > 0


def test_integrate_piecewise_kinks():
    f = lambda x: np.abs(x - 0.3) ** 1.5  # noqa: E731
    exact = (0.3 ** 2.5 + 0.7 ** 2.5) / 2.5
    assert numerics.integrate_piecewise(f, [0, 0.3, 1]) == pytest.approx(exact, rel=1e-13)


def test_integrate_real_line_gaussian():
    v = numerics.integrate_real_line(lambda x: np.exp(-x * x / 2), breakpoints=[0.0])
    assert v == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)


def test_settings_validation():
    with pytest.raises(PreconditionError):
        QuadSettings(abs_tol=0)
    with pytest.raises(PreconditionError):
        QuadSettings(max_subdivisions=0)


def test_maximize_1d():
    r = numerics.maximize_1d(lambda x: -(x - 0.3141) ** 2, 0, 1)
    assert r.argmax == pytest.approx(0.3141, abs=1e-7)
    assert r.value == pytest.approx(0.0, abs=1e-13)
    r = numerics.maximize_1d(lambda x: x, 0, 2)
    assert r.value == 2.0
    with pytest.raises(PreconditionError):
        numerics.maximize_1d(lambda x: x, 1, 1)


def test_gauss_kronrod_weights_sum():
    assert numerics.GK_KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert numerics.GK_GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=16))
@settings(max_examples=40, deadline=None)
def test_gauss_legendre_exact_for_polynomials(coefs):
    x, w = numerics.gauss_legendre(8)
    poly = np.polynomial.Polynomial(coefs)
    exact = poly.integ()(1.0) - poly.integ()(0.0)
    assert float(w @ poly(x)) == pytest.approx(exact, abs=1e-12 * (1 + np.abs(coefs).sum()))


def test_tensor_rule():
    nodes, w = numerics.tensor_rule(4, 3)
    assert nodes.shape == (64, 3)
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    assert float(w @ np.prod(nodes ** 2, axis=1)) == pytest.approx(1 / 27, rel=1e-14)
