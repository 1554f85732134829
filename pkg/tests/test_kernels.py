import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import (
    as_dense,
    as_sparse,
    assert_same,
    build,
    densify,
    oracle_mask,
    oracle_mxv,
    random_entries,
    random_vector,
    semiring,
)
from graphmxv.algebra import boolean_lor_land, min_plus, plus_times
from graphmxv.containers import (
    DenseVector,
    Descriptor,
    DimensionError,
    Mask,
    SparseVector,
    Toggles,
    matrix_from_edges,
)
from graphmxv.graphio import rmat_graph
from graphmxv.kernels import (
    AccessCounter,
    DispatchError,
    col_masked_mxv,
    col_mxv,
    frontier_edge_count,
    get_threads,
    merge_bound,
    merge_moves,
    mxv,
    row_masked_mxv,
    row_mxv,
    set_threads,
)

B = boolean_lor_land()
KINDS = ["bool", "int", "minplus"]
INSIDE = Descriptor(toggles=Toggles(early_exit=False, structure_only=False))
SCMP = Descriptor(scmp=True, toggles=Toggles(early_exit=False, structure_only=False))


def bool_dense(n, on):
    v = np.zeros(n, bool)
    v[list(on)] = True
    return DenseVector(v, np.False_)


def bool_sparse(n, on):
    on = sorted(on)
    return SparseVector(n, on, np.ones(len(on), bool), np.False_)


class TestFrontierEdgeCount:
    def test_examples(self, diamond):
        assert frontier_edge_count(diamond, bool_sparse(4, [0])) == 2
        assert frontier_edge_count(diamond, bool_sparse(4, [])) == 0
        assert frontier_edge_count(diamond, bool_dense(4, range(4))) == diamond.nnz
        assert frontier_edge_count(diamond, bool_sparse(4, [3]), "incoming") == 2

    def test_dimension(self, diamond):
        with pytest.raises(DimensionError):
            frontier_edge_count(diamond, bool_sparse(5, [0]))


class TestRowMxv:
    def test_identity_matrix(self):
        eye = matrix_from_edges([(i, i, 1) for i in range(5)], 5)
        x = DenseVector(np.array([4, 0, -2, 7, 1]), 0)
        assert row_mxv(eye, x, plus_times()).values.tolist() == [4, 0, -2, 7, 1]

    def test_diamond(self, diamond):
        out = row_mxv(diamond.T, bool_dense(4, [0, 1]), B)
        assert out.values.tolist() == [False, True, True, True]

    def test_zero_row_matrix(self):
        A = matrix_from_edges([(0, 1), (0, 2)], 4, dtype=np.bool_)
        c = AccessCounter()
        out = row_mxv(A.T, bool_dense(4, [3]), B, c)
        assert not out.values.any()
        assert c.matrix_reads == A.nnz

    def test_dimension(self, diamond):
        with pytest.raises(DimensionError):
            row_mxv(diamond, bool_dense(3, []), B)


class TestRowMasked:
    def test_empty_pass_set(self, diamond):
        c = AccessCounter()
        out = row_masked_mxv(diamond.T, bool_dense(4, [0]), Mask(np.zeros(4, bool)), INSIDE, B, c)
        assert not out.values.any()
        assert c.matrix_reads == 0

    def test_diamond_scmp(self, diamond):
        At = diamond.T
        m = Mask(np.array([1, 1, 0, 0], bool), np.False_)
        c = AccessCounter()
        out = row_masked_mxv(At, bool_dense(4, [0, 1]), m, SCMP, B, c)
        assert np.flatnonzero(out.values).tolist() == [2, 3]
        assert c.matrix_reads == At.row_degrees()[[2, 3]].sum()

    def test_early_exit_only_cuts_reads(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(2, 40))
            A = build(random_entries(rng, "bool", n, n, rng.uniform(0.05, 0.5)), n, n, "bool")
            x = as_dense(random_vector(rng, "bool", n, rng.uniform(0.1, 0.9)), n, "bool")
            m = Mask(rng.random(n) < 0.5, np.False_)
            on, off = AccessCounter(), AccessCounter()
            early = Descriptor(toggles=Toggles(early_exit=True))
            a = row_masked_mxv(A, x, m, early, B, on)
            b = row_masked_mxv(A, x, m, INSIDE, B, off)
            assert a == b
            assert on.matrix_reads <= off.matrix_reads

    def test_early_exit_ignored_for_min_plus(self):
        A = matrix_from_edges([(0, 1, 5.0), (0, 2, 1.0)], 3)
        x = DenseVector(np.array([np.inf, 0.0, 0.0]), np.inf)
        c = AccessCounter()
        out = row_masked_mxv(A, x, Mask(np.ones(3, bool)), Descriptor(), min_plus(), c)
        assert out.values[0] == 1.0
        assert c.early_exit_skipped

    def test_accumulate_keeps_prior(self):
        A = matrix_from_edges([(0, 1, 2), (1, 0, 3)], 2)
        x = DenseVector(np.array([1, 1]), 0)
        prev = DenseVector(np.array([10, 20]), 0)
        desc = Descriptor(accum=True)
        out = row_masked_mxv(A, x, Mask(np.array([True, False])), desc, plus_times(), out=prev)
        assert out.values.tolist() == [12, 20]


class TestColMxv:
    def test_single_column(self):
        rng = np.random.default_rng(5)
        ent = random_entries(rng, "int", 12, 12, 0.4)
        A = build(ent, 12, 12, "int")
        for i in range(12):
            out = col_mxv(A, SparseVector(12, [i], np.array([1]), 0), plus_times())
            col = {r: v for (r, j), v in ent.items() if j == i}
            assert out.to_pairs() == sorted(col.items())

    def test_empty_input(self, diamond):
        c = AccessCounter()
        out = col_mxv(diamond.T, bool_sparse(4, []), B, None, c)
        assert out.nnz == 0
        assert c.total == 0 and c.matrix_reads == 0

    def test_diamond(self, diamond):
        out = col_mxv(diamond.T, bool_sparse(4, [0]), B)
        assert out.indices.tolist() == [1, 2]


class TestColMasked:
    def test_transparent_mask(self):
        rng = np.random.default_rng(9)
        for kind in KINDS:
            n = 20
            A = build(random_entries(rng, kind, n, n, 0.3), n, n, kind)
            x = as_sparse(random_vector(rng, kind, n, 0.3), n, kind)
            s = semiring(kind)
            a = col_masked_mxv(A, x, Mask(np.ones(n, bool)), INSIDE, s)
            assert a == col_mxv(A, x, s, INSIDE)

    def test_diamond_new_vertex(self, diamond):
        m = Mask(np.array([1, 1, 1, 0], bool), np.False_)
        out = col_masked_mxv(diamond.T, bool_sparse(4, [1, 2]), m, SCMP, B)
        assert out.to_pairs() == [(3, True)]

    def test_reads_equal_unmasked(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            n = int(rng.integers(2, 40))
            A = build(random_entries(rng, "int", n, n, rng.uniform(0.05, 0.5)), n, n, "int")
            x = as_sparse(random_vector(rng, "int", n, 0.3), n, "int")
            m = Mask(rng.random(n) < 0.5, np.False_)
            a, b = AccessCounter(), AccessCounter()
            col_masked_mxv(A, x, m, INSIDE, plus_times(), a)
            col_mxv(A, x, plus_times(), INSIDE, b)
            assert a.matrix_reads == b.matrix_reads
            assert a.merge_comparisons == b.merge_comparisons


class TestMerge:
    @given(st.lists(st.integers(0, 50), max_size=40))
    def test_bound(self, lengths):
        assert merge_moves(lengths) <= merge_bound(sum(lengths), len(lengths))

    def test_small_cases(self):
        # two runs -> every element moves once
        assert merge_moves([3, 4]) == 7
        # four balanced runs -> two levels
        assert merge_moves([1, 1, 1, 1]) == 8
        assert merge_moves([5]) == 0
        assert merge_moves([]) == 0

    def test_structure_only_halves(self):
        A = rmat_graph(8, 8, 3).pattern()
        x = bool_sparse(A.num_rows, range(0, A.num_rows, 3))
        full, key = AccessCounter(), AccessCounter()
        a = col_mxv(A, x, B, INSIDE, full)
        b = col_mxv(A, x, B, Descriptor(toggles=Toggles()), key)
        assert a == b
        assert key.merge_comparisons == (full.merge_comparisons + 1) // 2
        assert key.matrix_reads == full.matrix_reads


class TestDispatch:
    def test_sparse_unmasked(self, diamond):
        c = AccessCounter()
        mxv(None, diamond.T, bool_sparse(4, [0]), B, Descriptor(direction="push"), c)
        assert c.last_kernel == "col_mxv"

    def test_dense_masked(self, diamond):
        c = AccessCounter()
        m = Mask(np.zeros(4, bool))
        mxv(m, diamond.T, bool_dense(4, [0]), B, Descriptor(direction="pull"), c)
        assert c.last_kernel == "row_masked_mxv"

    def test_not_a_vector(self, diamond):
        with pytest.raises(DispatchError):
            mxv(None, diamond, [1, 0, 0, 0], B)

    def test_auto_converts(self, diamond):
        c = AccessCounter()
        big = bool_sparse(4, [0, 1, 2])
        mxv(None, diamond.T, big, B, Descriptor(switchpoint=0.5), c)
        assert c.last_kernel == "row_mxv"

    def test_masking_off_filters(self, diamond):
        m = Mask(np.array([1, 1, 0, 0], bool), np.False_)
        desc = Descriptor(scmp=True, direction="pull", toggles=Toggles(masking=False))
        on = mxv(m, diamond.T, bool_dense(4, [0, 1]), B, Descriptor(scmp=True, direction="pull"))
        off = mxv(m, diamond.T, bool_dense(4, [0, 1]), B, desc)
        assert on == off

    @pytest.mark.parametrize("kind", KINDS)
    def test_all_paths_match_oracle(self, kind):
        rng = np.random.default_rng({"bool": 1, "int": 2, "minplus": 3}[kind])
        s = semiring(kind)
        for _ in range(200):
            rows, cols = (int(v) for v in rng.integers(1, 24, 2))
            ent = random_entries(rng, kind, rows, cols, rng.uniform(0.05, 0.5))
            A = build(ent, rows, cols, kind)
            xd = random_vector(rng, kind, cols, rng.uniform(0.05, 0.6))
            ind = rng.random(rows) < 0.5
            scmp = bool(rng.integers(2))
            want = oracle_mxv(ent, rows, cols, xd, kind)
            want_m = oracle_mask(want, ind, scmp, kind)
            for way, vec in (("push", as_sparse(xd, cols, kind)), ("pull", as_dense(xd, cols, kind))):
                d = Descriptor(scmp=scmp, direction=way)
                assert_same(densify(mxv(None, A, vec, s, d), kind), want, kind)
                got = mxv(Mask(ind.copy(), np.False_), A, vec, s, d)
                assert_same(densify(got, kind), want_m, kind)


class TestThreads:
    def test_results_independent_of_workers(self, monkeypatch):
        import graphmxv.kernels as k

        A = rmat_graph(10, 8, 2).pattern().T
        n = A.num_rows
        rng = np.random.default_rng(0)
        x = bool_dense(n, rng.choice(n, 300, replace=False))
        xs = bool_sparse(n, rng.choice(n, 300, replace=False))
        m = Mask(rng.random(n) < 0.5, np.False_)
        monkeypatch.setattr(k, "_PARALLEL_MIN_ROWS", 16)
        outs = []
        try:
            for t in (1, 3):
                set_threads(t)
                c1, c2, c3 = AccessCounter(), AccessCounter(), AccessCounter()
                r = (
                    row_mxv(A, x, B, c1).values,
                    row_masked_mxv(A, x, m, Descriptor(), B, c2).values,
                    col_mxv(A, xs, B, Descriptor(), c3).indices,
                )
                outs.append((r, c1.as_dict(), c2.as_dict(), c3.as_dict()))
        finally:
            set_threads(1)
        (r1, *c_1), (r3, *c_3) = outs
        for a, b in zip(r1, r3):
            np.testing.assert_array_equal(a, b)
        assert c_1 == c_3

    def test_set_threads(self):
        assert set_threads(2) == 2 and get_threads() == 2
        set_threads(1)
        with pytest.raises(ValueError):
            set_threads(0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(KINDS))
def test_four_way_equivalence(seed, kind):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 30))
    ent = random_entries(rng, kind, n, n, rng.uniform(0.05, 0.5))
    A = build(ent, n, n, kind)
    s = semiring(kind)
    xd = random_vector(rng, kind, n, 0.4)
    m = Mask(rng.random(n) < 0.5, np.False_)
    row = row_mxv(A, as_dense(xd, n, kind), s)
    col = col_mxv(A, as_sparse(xd, n, kind), s, INSIDE)
    assert_same(densify(col, kind), row.values.tolist(), kind)
    rm = row_masked_mxv(A, as_dense(xd, n, kind), m, INSIDE, s)
    assert_same(rm.values, oracle_mask(row.values.tolist(), m.indicator, False, kind), kind)
    cm = col_masked_mxv(A, as_sparse(xd, n, kind), m, INSIDE, s)
    assert_same(densify(cm, kind), oracle_mask(row.values.tolist(), m.indicator, False, kind), kind)
