"""Node sets and nonnegative quadrature rules: generation, transforms, file I/O.

Random streams come from SplitMix64 so they can be reproduced in any
language. Starting from the 64-bit ``seed``, the k-th output (k = 1, 2, ...)
is obtained by

    state = seed + k * 0x9E3779B97F4A7C15            (mod 2^64)
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9  (mod 2^64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB          (mod 2^64)
    z = z ^ (z >> 31)

and mapped to a double in [0, 1) as ``(z >> 11) * 2**-53``.

File format (UTF-8 text)::

    d=<int> n=<int> weighted=<0|1>
    x_1 ... x_d [w]
    ...

Lines starting with ``#`` and blank lines are ignored. Floats are written
with 17 significant digits so a write/read round trip is bit-exact.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BudgetExceededError, ParseError, PreconditionError

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
MAX_COORDINATES = 50_000_000


def splitmix64(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Outputs ``offset+1 .. offset+n`` of the SplitMix64 stream as uint64."""
    k = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed % 2 ** 64) + k * GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniform01(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Doubles in [0, 1) from the SplitMix64 stream."""
    return (splitmix64(seed, n, offset) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


class Domain(str, enum.Enum):
    CUBE = "cube"
    REAL = "real"


@dataclass(frozen=True, eq=False)
class PointSet:
    """N nodes in dimension d, optionally with nonnegative weights."""
    d: int
    nodes: np.ndarray
    weights: np.ndarray | None = None
    domain: Domain = Domain.CUBE

    def __post_init__(self):
        if self.d < 1:
            raise PreconditionError("dimension d must be >= 1")
        nodes = np.array(self.nodes, dtype=np.float64, copy=True).reshape(-1, self.d)
        if not np.all(np.isfinite(nodes)):
            raise PreconditionError("node coordinates must be finite")
        dom = Domain(self.domain)
        if dom is Domain.CUBE and nodes.size and (nodes.min() < 0.0 or nodes.max() >= 1.0):
            raise PreconditionError("cube coordinates must lie in [0, 1)")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "domain", dom)
        if self.weights is not None:
            w = np.array(self.weights, dtype=np.float64, copy=True).reshape(-1)
            if w.shape[0] != nodes.shape[0]:
                raise PreconditionError("need one weight per node")
            if not np.all(np.isfinite(w)) or np.any(w < 0):
                raise PreconditionError("weights must be finite and nonnegative")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.nodes.shape[0]

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        if (self.d, self.domain) != (other.d, other.domain):
            return False
        if not np.array_equal(self.nodes, other.nodes):
            return False
        if (self.weights is None) != (other.weights is None):
            return False
        return self.weights is None or np.array_equal(self.weights, other.weights)

    __hash__ = None

    @classmethod
    def empty(cls, d: int) -> "PointSet":
        return cls(d, np.zeros((0, d)))

    def project(self, coords) -> "PointSet":
        """Restriction to the listed coordinates (0-based)."""
        coords = list(coords)
        return PointSet(len(coords), self.nodes[:, coords], self.weights, self.domain)

    def with_node(self, x) -> "PointSet":
        x = np.asarray(x, dtype=float).reshape(1, self.d)
        if self.weights is not None:
            raise PreconditionError("with_node is only defined for unweighted sets")
        return PointSet(self.d, np.vstack([self.nodes, x]), None, self.domain)

    def permuted(self, perm) -> "PointSet":
        """Apply the same coordinate permutation to every node."""
        return PointSet(self.d, self.nodes[:, list(perm)], self.weights, self.domain)


class GeneratorKind(str, enum.Enum):
    UNIFORM_RANDOM = "uniform-random"
    GRID = "grid"
    RANK1_LATTICE = "rank1-lattice"
    VDC_PRODUCT = "vdc-product"


def _check_budget(d: int, n: int) -> None:
    if d * n > MAX_COORDINATES:
        raise BudgetExceededError(
            f"{n} points in dimension {d} exceed the budget of {MAX_COORDINATES} coordinates")


def _int_root_ceil(n: int, d: int) -> int:
    """Smallest m with m**d >= n."""
    m = max(1, int(round(n ** (1.0 / d))))
    while m ** d < n:
        m += 1
    while m > 1 and (m - 1) ** d >= n:
        m -= 1
    return m


def first_primes(k: int) -> list[int]:
    primes: list[int] = []
    c = 2
    while len(primes) < k:
        if all(c % p for p in primes if p * p <= c):
            primes.append(c)
        c += 1
    return primes


def radical_inverse(idx: np.ndarray, base: int) -> np.ndarray:
    """Van der Corput radical inverse of nonnegative integers in ``base``."""
    idx = np.asarray(idx, dtype=np.int64).copy()
    out = np.zeros(idx.shape, dtype=np.float64)
    scale = 1.0 / base
    while np.any(idx > 0):
        out += (idx % base) * scale
        idx //= base
        scale /= base
    return out


def _grid(d: int, n: int) -> np.ndarray:
    m = _int_root_ceil(n, d)
    k = np.arange(n, dtype=object if m ** d >= 2 ** 62 else np.int64)
    cols = []
    for j in range(d - 1, -1, -1):
        cols.append(np.asarray(k % m, dtype=np.float64))
        k = k // m
    return (np.stack(cols[::-1], axis=1) + 0.5) / m if n else np.zeros((0, d))


def _lattice_cbc(d: int, n: int, a: float = 0.5) -> np.ndarray:
    """Rank-1 lattice with generating vector chosen component by component.

    Each new component minimizes the squared L2 anchored discrepancy of the
    lattice restricted to the components chosen so far.
    """
    from .discrepancy import p2_kernels

    if n == 0:
        return np.zeros((0, d))
    k = np.arange(n)
    m2, bfun, cfun = p2_kernels("anchored", a)
    z = [1]
    prod_b = np.ones(n)
    prod_c = np.ones((n, n))

    def col(g):
        return (k * g % n) / n

    y = col(1)
    prod_b *= 1.0 + bfun(y)
    prod_c *= 1.0 + cfun(y[:, None], y[None, :])
    candidates = [g for g in range(1, max(n, 2)) if math.gcd(g, n) == 1] or [1]
    for _ in range(1, d):
        best, best_val = None, math.inf
        for g in candidates:
            y = col(g)
            # terms independent of g are dropped; ties broken by smallest g
            val = (-2.0 / n * np.dot(prod_b, 1.0 + bfun(y))
                   + np.sum(prod_c * (1.0 + cfun(y[:, None], y[None, :]))) / n ** 2)
            if best is None or val < best_val - 1e-15 * abs(best_val):
                best, best_val = g, val
        z.append(best)
        y = col(best)
        prod_b *= 1.0 + bfun(y)
        prod_c *= 1.0 + cfun(y[:, None], y[None, :])
    zz = np.array(z, dtype=np.int64)
    return (np.outer(k, zz) % n) / n


def generate(kind, d: int, n: int, seed: int = 0) -> PointSet:
    """Deterministic point set of the given kind (``seed`` only affects random sets)."""
    kind = GeneratorKind(kind)
    if d < 1 or n < 0:
        raise PreconditionError("need d >= 1 and n >= 0")
    _check_budget(d, n)
    if kind is GeneratorKind.UNIFORM_RANDOM:
        nodes = uniform01(seed, n * d).reshape(n, d)
    elif kind is GeneratorKind.GRID:
        nodes = _grid(d, n)
    elif kind is GeneratorKind.RANK1_LATTICE:
        nodes = _lattice_cbc(d, n)
    else:
        idx = np.arange(n)
        nodes = np.stack([radical_inverse(idx, b) for b in first_primes(d)], axis=1) \
            if n else np.zeros((0, d))
    return PointSet(d, nodes)


def anchor_transform(ps: PointSet, a: float) -> PointSet:
    """Map every coordinate x to (a - x) mod 1."""
    if ps.domain is not Domain.CUBE:
        raise PreconditionError("anchor_transform needs cube nodes")
    y = np.mod(a - ps.nodes, 1.0)
    y[y >= 1.0] = 0.0  # tiny negative a - x rounds up to 1.0
    return PointSet(ps.d, y, ps.weights, ps.domain)


# --- file I/O ---------------------------------------------------------------

_HEADER = re.compile(r"^d=(\d+)\s+n=(\d+)\s+weighted=([01])$")


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def dumps(ps: PointSet) -> str:
    weighted = ps.weights is not None
    lines = [f"d={ps.d} n={ps.n} weighted={int(weighted)}"]
    for i in range(ps.n):
        row = [format_float(v) for v in ps.nodes[i]]
        if weighted:
            row.append(format_float(ps.weights[i]))
        lines.append(" ".join(row))
    return "\n".join(lines) + "\n"


def loads(text: str, domain=Domain.CUBE) -> PointSet:
    header = None
    rows: list[list[float]] = []
    weights: list[float] = []
    last = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        last = lineno
        if header is None:
            m = _HEADER.match(line)
            if not m:
                raise ParseError(f"malformed header {line!r}", lineno)
            header = (int(m.group(1)), int(m.group(2)), m.group(3) == "1")
            if header[0] < 1:
                raise ParseError("dimension must be >= 1", lineno)
            continue
        d, n, weighted = header
        parts = line.split()
        want = d + int(weighted)
        if len(parts) != want:
            raise ParseError(f"expected {want} columns, found {len(parts)}", lineno)
        try:
            vals = [float(s) for s in parts]
        except ValueError as exc:
            raise ParseError(f"bad number: {exc}", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("non-finite value", lineno)
        if weighted:
            if vals[-1] < 0:
                raise ParseError("negative weight", lineno)
            weights.append(vals.pop())
        if Domain(domain) is Domain.CUBE and not all(0.0 <= v < 1.0 for v in vals):
            raise ParseError("cube coordinate outside [0, 1)", lineno)
        if len(rows) >= n:
            raise ParseError(f"more than n={n} rows", lineno)
        rows.append(vals)
    if header is None:
        raise ParseError("missing header", max(last, 1))
    d, n, weighted = header
    if len(rows) != n:
        raise ParseError(f"header announces n={n} rows, found {len(rows)}", last)
    nodes = np.array(rows, dtype=np.float64).reshape(n, d)
    return PointSet(d, nodes, np.array(weights) if weighted else None, domain)


def read(path, domain=Domain.CUBE) -> PointSet:
    return loads(Path(path).read_text(encoding="utf-8"), domain)


def write(ps: PointSet, path) -> None:
    Path(path).write_text(dumps(ps), encoding="utf-8")
