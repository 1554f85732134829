"""Shared fixtures and brute-force oracles."""

from __future__ import annotations

import math

import numpy as np
import pytest

from graphmxv import algebra
from graphmxv.containers import Mask, SparseVector, DenseVector, matrix_from_edges

# Plain-Python semiring definitions, independent of the numpy ufuncs.
PY_SEMIRINGS = {
    "bool": (lambda a, b: a or b, lambda a, b: a and b, False),
    "int": (lambda a, b: a + b, lambda a, b: a * b, 0),
    "minplus": (min, lambda a, b: a + b, math.inf),
}


def semiring(kind):
    return {
        "bool": algebra.boolean_lor_land,
        "int": algebra.plus_times,
        "minplus": algebra.min_plus,
    }[kind]()


def random_entries(rng, kind, rows, cols, density):
    present = rng.random((rows, cols)) < density
    if kind == "bool":
        vals = np.ones((rows, cols), dtype=bool)
    elif kind == "int":
        vals = rng.integers(1, 6, (rows, cols)) * rng.choice([-1, 1], (rows, cols))
    else:
        vals = rng.integers(0, 20, (rows, cols)).astype(float) + rng.random((rows, cols))
    return {
        (int(i), int(j)): vals[i, j].item() for i, j in zip(*np.nonzero(present))
    }


def build(entries, rows, cols, kind):
    s = semiring(kind)
    edges = [(i, j, v) for (i, j), v in sorted(entries.items())]
    if not edges:
        return matrix_from_edges(np.empty((0, 3)), rows, cols, dtype=s.dtype)
    return matrix_from_edges(edges, rows, cols, dtype=s.dtype)


def random_vector(rng, kind, n, density):
    """Dict index -> value with no identity values."""
    pick = rng.random(n) < density
    out = {}
    for j in np.flatnonzero(pick):
        if kind == "bool":
            out[int(j)] = True
        elif kind == "int":
            out[int(j)] = int(rng.integers(1, 6) * rng.choice([-1, 1]))
        else:
            out[int(j)] = float(rng.integers(0, 20) + rng.random())
    return out


def as_sparse(vec: dict, n: int, kind: str) -> SparseVector:
    s = semiring(kind)
    idx = sorted(vec)
    return SparseVector(n, idx, np.array([vec[i] for i in idx], dtype=s.dtype), s.identity)


def as_dense(vec: dict, n: int, kind: str) -> DenseVector:
    s = semiring(kind)
    out = np.full(n, s.identity, dtype=s.dtype)
    for i, v in vec.items():
        out[i] = v
    return DenseVector(out, s.identity)


def oracle_mxv(entries: dict, rows: int, cols: int, x: dict, kind: str) -> list:
    """Dense double loop: w[i] = add_j A[i, j] * x[j] over present pairs."""
    add, mul, ident = PY_SEMIRINGS[kind]
    w = []
    for i in range(rows):
        acc = ident
        for j in range(cols):
            if (i, j) in entries and j in x:
                acc = add(acc, mul(entries[(i, j)], x[j]))
        w.append(acc)
    return w


def oracle_mask(w: list, indicator, scmp: bool, kind: str) -> list:
    ident = PY_SEMIRINGS[kind][2]
    return [v if bool(indicator[i]) != scmp else ident for i, v in enumerate(w)]


def densify(v, kind) -> np.ndarray:
    if isinstance(v, DenseVector):
        return v.values
    s = semiring(kind)
    out = np.full(v.length, s.identity, dtype=s.dtype)
    out[v.indices] = v.values
    return out


def assert_same(got: np.ndarray, want: list, kind: str) -> None:
    want = np.array(want, dtype=semiring(kind).dtype)
    if kind == "minplus":
        np.testing.assert_allclose(got, want, rtol=1e-10, atol=0)
    else:
        np.testing.assert_array_equal(got, want)


def random_mask(rng, n) -> Mask:
    return Mask(rng.random(n) < rng.uniform(0.1, 0.9), np.False_)


@pytest.fixture
def diamond():
    return matrix_from_edges([(0, 1), (0, 2), (1, 3), (2, 3)], 4, dtype=np.bool_)


@pytest.fixture
def diamond_weighted():
    return matrix_from_edges([(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)], 4)


# Acceptance results, printed once at the end of the run.
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
