import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import disc_power_1d, disc_power_2d
from cursekit.discrepancy import (DiscrepancyKind, DiscrepancySettings, discrepancy,
                                  initial_discrepancy, local_discrepancy, qmc_worst_case_error)
from cursekit.errors import BudgetExceededError, PreconditionError
from cursekit.pointsets import Domain, PointSet, anchor_transform, generate
from cursekit.spaces import SpaceKind, SpaceSpec


def pts(seed, n, d):
    return PointSet(d, np.random.default_rng(seed).random((n, d)))


def test_kind_validation():
    with pytest.raises(PreconditionError):
        DiscrepancyKind("anchored", p=0.5)
    with pytest.raises(PreconditionError):
        DiscrepancyKind("anchored", a=1.0)
    with pytest.raises(ValueError):
        DiscrepancyKind("star")


def test_local_discrepancy_definition():
    ps = PointSet(2, [[0.1, 0.2], [0.6, 0.7]])
    # anchored box between t=(0.3, 0.4) and a=0.5 contains no node
    assert local_discrepancy(DiscrepancyKind("anchored"), ps, [0.3, 0.4]) == pytest.approx(-0.2 * 0.1)
    # quadrant at t=(0.3, 0.8): [0,0.3) x [0.8,1)
    assert local_discrepancy(DiscrepancyKind("quadrant"), ps, [0.3, 0.8]) == pytest.approx(-0.3 * 0.2)
    assert local_discrepancy(DiscrepancyKind("quadrant"), ps, [0.3, 0.3]) == pytest.approx(0.5 - 0.09)


@pytest.mark.parametrize("fam", ["anchored", "quadrant"])
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("a", [0.3, 0.5])
def test_box_exact_matches_1d_oracle(fam, p, a):
    ps = pts(int(10 * p + 100 * a), 7, 1)
    got = discrepancy(DiscrepancyKind(fam, p, a), ps).value
    want = disc_power_1d(ps.nodes, a, p, fam == "quadrant") ** (1 / p)
    assert got == pytest.approx(want, rel=1e-9)


@pytest.mark.parametrize("fam", ["anchored", "quadrant"])
@pytest.mark.parametrize("p", [1.0, 2.5, 3.0])
def test_box_exact_matches_2d_nested_quadrature(fam, p):
    ps = pts(int(p * 7), 4, 2)
    got = discrepancy(DiscrepancyKind(fam, p, 0.4), ps).value
    want = disc_power_2d(ps.nodes, 0.4, p, fam == "quadrant") ** (1 / p)
    assert got == pytest.approx(want, rel=1e-7)


@given(st.integers(0, 10_000), st.integers(1, 12), st.integers(1, 3), st.sampled_from([0.3, 0.5, 0.7]))
@settings(max_examples=30, deadline=None)
def test_p2_backends_agree(seed, n, d, a):
    ps = pts(seed, n, d)
    for fam in ("anchored", "quadrant"):
        k = DiscrepancyKind(fam, 2.0, a)
        assert discrepancy(k, ps, "closed-form-p2").value == pytest.approx(
            discrepancy(k, ps, "box-exact").value, rel=1e-9, abs=1e-14)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_monte_carlo_within_stderr(p):
    ps = pts(3, 10, 2)
    k = DiscrepancyKind("quadrant", p, 0.3)
    exact = discrepancy(k, ps).value
    mc = discrepancy(k, ps, "monte-carlo", DiscrepancySettings(seed=11, n_samples=400_000))
    assert mc.stderr > 0 and mc.n_samples == 400_000
    assert abs(mc.value - exact) <= 4 * mc.stderr


def test_monte_carlo_reproducible_and_needs_seed():
    ps = pts(4, 5, 3)
    k = DiscrepancyKind("anchored")
    s = DiscrepancySettings(seed=3, n_samples=10_000)
    assert discrepancy(k, ps, "monte-carlo", s) == discrepancy(k, ps, "monte-carlo", s)
    with pytest.raises(PreconditionError, match="seed"):
        discrepancy(k, ps, "monte-carlo")


def test_closed_form_refuses_p_not_2():
    with pytest.raises(PreconditionError):
        discrepancy(DiscrepancyKind("anchored", 3.0), pts(0, 3, 2), "closed-form-p2")


def test_refuses_weighted_and_real_line_sets():
    with pytest.raises(PreconditionError):
        discrepancy(DiscrepancyKind("anchored"), PointSet(1, [[0.2]], weights=[1.0]))
    with pytest.raises(PreconditionError):
        discrepancy(DiscrepancyKind("anchored"), PointSet(1, [[0.2]], domain=Domain.REAL))


def test_anchor_transform_maps_anchored_to_quadrant():
    a = 0.3
    ps = pts(9, 6, 2)
    moved = anchor_transform(ps, a)
    t = np.random.default_rng(1).random((50, 2))
    for ti in t:
        tq = np.mod(a - ti, 1.0)
        loc_a = local_discrepancy(DiscrepancyKind("anchored", 2.0, a), moved, tq)
        loc_q = local_discrepancy(DiscrepancyKind("quadrant", 2.0, a), ps, ti)
        assert abs(loc_a) == pytest.approx(abs(loc_q), abs=1e-12)
    assert discrepancy(DiscrepancyKind("anchored", 2.0, a), moved).value == pytest.approx(
        discrepancy(DiscrepancyKind("quadrant", 2.0, a), ps).value, rel=1e-12)


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_generalized_is_lp_sum_of_projections(p):
    ps = pts(5, 5, 3)
    k = DiscrepancyKind("anchored", p, 0.5, True)
    plain = DiscrepancyKind("anchored", p, 0.5)
    total = sum(discrepancy(plain, ps.project(u)).value ** p
                for r in range(1, 4) for u in itertools.combinations(range(3), r))
    assert discrepancy(k, ps).value == pytest.approx(total ** (1 / p), rel=1e-12)
    if p == 2.0:
        assert discrepancy(k, ps, "closed-form-p2").value == pytest.approx(total ** 0.5, rel=1e-12)


def test_generalized_dimension_cap():
    with pytest.raises(BudgetExceededError):
        discrepancy(DiscrepancyKind("anchored", 2.0, 0.5, True), PointSet.empty(20))


def test_threads_do_not_change_result():
    ps = pts(6, 6, 3)
    k = DiscrepancyKind("quadrant", 1.5, 0.4, True)
    one = discrepancy(k, ps, settings=DiscrepancySettings(threads=1)).value
    many = discrepancy(k, ps, settings=DiscrepancySettings(threads=4)).value
    assert one == many


def test_initial_discrepancy_values():
    k = DiscrepancyKind("anchored", 2.0, 0.5)
    assert initial_discrepancy(k, 1) == pytest.approx(math.sqrt(1 / 12))
    kg = DiscrepancyKind("anchored", 2.0, 0.5, True)
    assert initial_discrepancy(kg, 2) == pytest.approx(13 / 12)


@given(st.integers(0, 1000), st.integers(1, 8), st.integers(1, 3))
@settings(max_examples=20, deadline=None)
def test_duplicate_nodes_and_permutation_invariance(seed, n, d):
    ps = pts(seed, n, d)
    k = DiscrepancyKind("quadrant", 2.0, 0.4)
    v = discrepancy(k, ps, "closed-form-p2").value
    perm = list(range(d))[::-1]
    assert discrepancy(k, ps.permuted(perm), "closed-form-p2").value == pytest.approx(v, rel=1e-12)
    shuffled = PointSet(d, ps.nodes[np.random.default_rng(seed).permutation(n)])
    assert discrepancy(k, shuffled, "closed-form-p2").value == pytest.approx(v, rel=1e-12)


def test_qmc_worst_case_error_space_routing():
    ps = pts(2, 8, 2)
    anchored = SpaceSpec(SpaceKind.ANCHORED_SOBOLEV, q=2.0, a=0.3)
    v = qmc_worst_case_error(anchored, ps).value
    assert v == pytest.approx(
        discrepancy(DiscrepancyKind("anchored", 2.0, 0.3), anchor_transform(ps, 0.3)).value)
    assert qmc_worst_case_error(anchored, ps, family="quadrant").value == pytest.approx(
        discrepancy(DiscrepancyKind("quadrant", 2.0, 0.3), ps).value)
    noanchor = SpaceSpec(SpaceKind.NO_ANCHOR_SOBOLEV, q=2.0, a=0.5)
    assert qmc_worst_case_error(noanchor, PointSet.empty(2)).value == pytest.approx(13 / 12)
    with pytest.raises(PreconditionError):
        qmc_worst_case_error(SpaceSpec(SpaceKind.POLY2), ps)
    with pytest.raises(PreconditionError):
        qmc_worst_case_error(SpaceSpec(SpaceKind.ANCHORED_SOBOLEV, r=2), ps)


def test_qmc_error_dominates_error_on_a_unit_norm_function():
    # f(x) = prod_j (x_j - a) has mixed first derivative 1, so ||f|| = 1
    a = 0.5
    spec = SpaceSpec(SpaceKind.ANCHORED_SOBOLEV, q=2.0, a=a)
    ps = pts(12, 10, 2)
    f = np.prod(ps.nodes - a, axis=1)
    err = abs(0.0 - f.mean())  # I(f) = 0
    assert err <= qmc_worst_case_error(spec, ps).value + 1e-15


def test_lattice_cbc_picks_minimizer_in_d2():
    n = 11
    lat = generate("rank1-lattice", 2, n)
    k = DiscrepancyKind("anchored", 2.0, 0.5)
    best = min(
        discrepancy(k, PointSet(2, np.stack([np.arange(n) / n, (np.arange(n) * g % n) / n], 1)),
                    "closed-form-p2").value for g in range(1, n))
    assert discrepancy(k, lat, "closed-form-p2").value == pytest.approx(best, rel=1e-12)
