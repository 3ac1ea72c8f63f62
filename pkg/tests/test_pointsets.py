import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cursekit import pointsets
from cursekit.errors import BudgetExceededError, ParseError, PreconditionError
from cursekit.pointsets import Domain, GeneratorKind, PointSet, anchor_transform, generate


def test_splitmix64_reference_values():
    # first outputs of the reference SplitMix64 with state 0
    out = pointsets.splitmix64(0, 3)
    assert [int(v) for v in out] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_splitmix64_offset_is_counter_based():
    full = pointsets.splitmix64(42, 10)
    assert np.array_equal(pointsets.splitmix64(42, 4, offset=6), full[6:])


def test_uniform01_range():
    u = pointsets.uniform01(7, 10_000)
    assert u.min() >= 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.02


def test_pointset_validation():
    with pytest.raises(PreconditionError):
        PointSet(0, np.zeros((0, 0)))
    with pytest.raises(PreconditionError):
        PointSet(2, [[0.5, 1.0]])
    with pytest.raises(PreconditionError):
        PointSet(1, [[0.5]], weights=[-1.0])
    with pytest.raises(PreconditionError):
        PointSet(1, [[0.5]], weights=[1.0, 2.0])
    PointSet(1, [[-3.0]], domain=Domain.REAL)


def test_pointset_is_immutable():
    ps = PointSet(2, [[0.1, 0.2]])
    with pytest.raises(ValueError):
        ps.nodes[0, 0] = 0.3


def test_project_permute_with_node():
    ps = PointSet(3, [[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]])
    assert np.array_equal(ps.project([2, 0]).nodes, [[0.3, 0.1], [0.6, 0.4]])
    assert np.array_equal(ps.permuted([1, 2, 0]).nodes, [[0.2, 0.3, 0.1], [0.5, 0.6, 0.4]])
    assert ps.with_node([0.7, 0.8, 0.9]).n == 3
    assert PointSet.empty(4).n == 0


@pytest.mark.parametrize("kind", list(GeneratorKind))
def test_generators_deterministic_and_in_cube(kind):
    a = generate(kind, 3, 17, seed=5)
    b = generate(kind, 3, 17, seed=5)
    assert a == b
    assert a.nodes.shape == (17, 3)
    assert a.nodes.min() >= 0 and a.nodes.max() < 1


def test_grid_points():
    ps = generate("grid", 2, 4)
    assert np.array_equal(ps.nodes, [[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]])
    assert generate("grid", 2, 5).nodes.shape == (5, 2)


def test_vdc_product():
    ps = generate("vdc-product", 2, 4)
    assert np.allclose(ps.nodes[:, 0], [0, 0.5, 0.25, 0.75])
    assert np.allclose(ps.nodes[:, 1], [0, 1 / 3, 2 / 3, 1 / 9])


def test_lattice_structure():
    ps = generate("rank1-lattice", 4, 13)
    assert np.allclose(ps.nodes[:, 0], np.arange(13) / 13)
    z = np.rint(ps.nodes[1] * 13).astype(int)
    assert np.allclose(ps.nodes, (np.outer(np.arange(13), z) % 13) / 13)


def test_generation_budget():
    with pytest.raises(BudgetExceededError):
        generate("uniform-random", 1000, 100_000)


def test_anchor_transform():
    ps = PointSet(2, [[0.1, 0.5], [0.7, 0.0]])
    t = anchor_transform(ps, 0.5)
    assert np.allclose(t.nodes, [[0.4, 0.0], [0.8, 0.5]])
    with pytest.raises(PreconditionError):
        anchor_transform(PointSet(1, [[2.0]], domain=Domain.REAL), 0.5)


@given(st.integers(1, 5), st.integers(0, 12), st.booleans(), st.integers(0, 2 ** 63))
@settings(max_examples=60, deadline=None)
def test_file_roundtrip_is_bit_exact(d, n, weighted, seed):
    x = pointsets.uniform01(seed, n * d).reshape(n, d)
    w = pointsets.uniform01(seed + 1, n) * 3 if weighted else None
    ps = PointSet(d, x, w)
    assert pointsets.loads(pointsets.dumps(ps)) == ps


def test_read_write(tmp_path):
    ps = generate("uniform-random", 3, 5, seed=1)
    path = tmp_path / "p.txt"
    pointsets.write(ps, path)
    assert pointsets.read(path) == ps


def test_comments_and_blank_lines():
    text = "# header comment\n\nd=2 n=1 weighted=1\n# row\n0.25 0.5 2\n"
    ps = pointsets.loads(text)
    assert ps.n == 1 and ps.weights[0] == 2.0


@pytest.mark.parametrize("text,line", [
    ("d=2 n=1 weighted=0\n0.1\n", 2),
    ("d=2 n=1 weighted=0\n0.1 1.5\n", 2),
    ("d=1 n=1 weighted=1\n0.1 -2\n", 2),
    ("d=1 n=2 weighted=0\n0.1\n", 2),
    ("d=1 n=1 weighted=0\n0.1\n0.2\n", 3),
    ("dim=1 n=1\n", 1),
    ("d=1 n=1 weighted=0\nabc\n", 2),
    ("", 1),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        pointsets.loads(text)
    assert info.value.lineno == line


def test_real_domain_file():
    ps = pointsets.loads("d=1 n=2 weighted=0\n-1.5\n2.5\n", domain=Domain.REAL)
    assert ps.domain is Domain.REAL
