import itertools

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.stats import ks_2samp, ortho_group

from syngait.exceptions import ExactTooLarge, InvalidK, ShapeMismatch, SizeMismatch, ZeroNorm
from syngait.metrics import (
    REPORT_SCHEMA,
    evaluate,
    hidden_rate,
    knn_graph,
    knng_frobenius,
    ks_complement,
    local_cloaking,
    rv_coefficient,
    statistic_similarity,
)


def random_graph(rng, n, k):
    return knn_graph(rng.normal(size=(n, 2)), k)


def brute_force_cloaking(F, G):
    n = F.shape[0]
    out = []
    for i in range(n):
        own = np.linalg.norm(F[i] - G[i])
        out.append(sum(np.linalg.norm(F[i] - G[j]) < own for j in range(n)))
    return np.array(out)


def brute_force_ks(f, g):
    pooled = np.concatenate([f, g])
    return max(abs(np.mean(f <= x) - np.mean(g <= x)) for x in pooled)


class TestKnnGraph:
    def test_collinear(self):
        A = knn_graph(np.array([[0.0], [1.0], [3.0]]), 1)
        assert A.tolist() == [[0, 1, 0], [1, 0, 1], [0, 1, 0]]

    def test_complete(self, rng):
        A = knn_graph(rng.normal(size=(6, 2)), 5)
        assert np.array_equal(A, 1 - np.eye(6, dtype=int))

    def test_symmetric_zero_diagonal(self, rng):
        for k in (1, 3, 7):
            A = knn_graph(rng.normal(size=(12, 3)), k)
            assert np.array_equal(A, A.T) and not A.diagonal().any()
            assert np.all(A.sum(axis=1) >= k)

    def test_mutual_subset_of_union(self, rng):
        X = rng.normal(size=(15, 2))
        assert np.all(knn_graph(X, 3, "mutual") <= knn_graph(X, 3))

    def test_index_tie_break(self):
        # point 1 is equidistant from 0 and 2 and picks 0, so only (0, 1) is mutual
        A = knn_graph(np.array([[0.0], [1.0], [2.0]]), 1, "mutual")
        assert A.tolist() == [[0, 1, 0], [1, 0, 0], [0, 0, 0]]

    @pytest.mark.parametrize("k", [0, 4])
    def test_invalid_k(self, k):
        with pytest.raises(InvalidK):
            knn_graph(np.zeros((4, 2)), k)


class TestFrobenius:
    def test_identical(self, rng):
        A = random_graph(rng, 7, 2)
        for mode in ("exact", "paired", "heuristic"):
            assert knng_frobenius(A, A, mode) == 0

    def test_one_edge(self):
        A = np.zeros((4, 4), dtype=int)
        B = A.copy()
        B[0, 1] = B[1, 0] = 1
        assert knng_frobenius(A, B, "paired") == pytest.approx(np.sqrt(2), abs=0)

    def test_relabeled_exact(self, rng):
        A = random_graph(rng, 7, 2)
        perm = rng.permutation(7)
        assert knng_frobenius(A, A[np.ix_(perm, perm)], "exact") == 0

    def test_exact_symmetric(self, rng):
        A, B = random_graph(rng, 6, 2), random_graph(rng, 6, 2)
        assert knng_frobenius(A, B, "exact") == knng_frobenius(B, A, "exact")

    def test_heuristic_bounds_exact(self, rng):
        for _ in range(50):
            A, B = random_graph(rng, 7, 2), random_graph(rng, 7, 2)
            exact = knng_frobenius(A, B, "exact")
            assert knng_frobenius(A, B, "heuristic") >= exact - 1e-12
            assert knng_frobenius(A, B, "paired") >= exact - 1e-12

    def test_swap_gain_formula_matches_recompute(self, rng):
        from syngait.metrics import _swap_gains
        A = random_graph(rng, 9, 3).astype(float)
        C = random_graph(rng, 9, 3).astype(float)
        gains = _swap_gains(A, C)
        base = np.sum((A - C) ** 2)
        for a, b in itertools.combinations(range(9), 2):
            perm = np.arange(9)
            perm[[a, b]] = perm[[b, a]]
            assert gains[a, b] == pytest.approx(base - np.sum((A - C[np.ix_(perm, perm)]) ** 2), abs=1e-9)

    def test_errors(self, rng):
        with pytest.raises(SizeMismatch):
            knng_frobenius(np.zeros((3, 3)), np.zeros((4, 4)))
        with pytest.raises(ExactTooLarge):
            knng_frobenius(np.zeros((9, 9)), np.zeros((9, 9)), "exact")
        with pytest.raises(ValueError):
            knng_frobenius(np.zeros((3, 3)), np.zeros((3, 3)), "other")


class TestRv:
    def test_identity_and_scale(self, rng):
        F = rng.normal(size=(20, 5))
        assert rv_coefficient(F, F) == pytest.approx(1, abs=1e-12)
        assert rv_coefficient(F, 3 * F) == pytest.approx(1, abs=1e-12)
        assert rv_coefficient(F, -0.5 * F) == pytest.approx(1, abs=1e-12)

    def test_orthogonal_columns(self):
        assert rv_coefficient(np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]])) == 0

    def test_rotation_invariance(self, rng):
        F, G = rng.normal(size=(15, 4)), rng.normal(size=(15, 4))
        O = ortho_group.rvs(4, random_state=1)
        assert rv_coefficient(F, G @ O) == pytest.approx(rv_coefficient(F, G), abs=1e-8)
        assert 0 <= rv_coefficient(F, G) <= 1

    def test_trace_definition(self, rng):
        F, G = rng.normal(size=(10, 3)), rng.normal(size=(10, 2))
        s = lambda a, b: a.T @ b / 9  # noqa: E731
        expected = np.trace(s(F, G) @ s(G, F)) / np.sqrt(np.trace(s(F, F) @ s(F, F)) * np.trace(s(G, G) @ s(G, G)))
        assert rv_coefficient(F, G) == pytest.approx(expected, rel=1e-12)

    def test_errors(self):
        with pytest.raises(ZeroNorm):
            rv_coefficient(np.zeros((3, 2)), np.ones((3, 2)))
        with pytest.raises(ShapeMismatch):
            rv_coefficient(np.ones((3, 2)), np.ones((4, 2)))


class TestStatisticSimilarity:
    def test_identical(self, rng):
        F = rng.normal(size=(10, 3))
        assert statistic_similarity(F, F, "mean") == 1
        assert statistic_similarity(F, F, "sd") == 1

    def test_shifted_by_range(self):
        assert statistic_similarity([[0.0], [1.0]], [[1.0], [2.0]], "mean") == 0.0

    def test_half_range(self):
        assert statistic_similarity([[0.0], [1.0]], [[0.5], [1.5]], "mean") == 0.5

    def test_sd_uses_n_minus_one(self):
        # sd({0, 2}) = sqrt(2) with ddof 1, sd({0, 1}) = sqrt(0.5); range 2
        got = statistic_similarity([[0.0], [2.0]], [[0.0], [1.0]], "sd")
        assert got == pytest.approx(1 - (np.sqrt(2) - np.sqrt(0.5)) / 2, abs=1e-15)

    def test_zero_range(self):
        F = np.array([[1.0, 0.0], [1.0, 1.0]])
        assert statistic_similarity(F, F, per_column=True).tolist() == [1.0, 1.0]
        assert statistic_similarity(F, F + [0.1, 0.0], per_column=True).tolist() == [0.0, 1.0]

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            statistic_similarity(np.ones((3, 2)), np.ones((3, 3)))


class TestKs:
    def test_worked_example(self):
        assert ks_complement(np.array([[0.0], [1], [2], [3]]), np.array([[0.0], [1], [2], [7]])) == 0.75

    def test_identical_and_disjoint(self, rng):
        f = rng.normal(size=(20, 1))
        assert ks_complement(f, f) == 1
        assert ks_complement(f, f + 100) == 0

    # scipy's p-value path divides by zero on one-point samples; only the statistic matters here
    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    @settings(max_examples=100, deadline=None)
    @given(arrays(float, st.integers(1, 15), elements=st.integers(-5, 5)),
           arrays(float, st.integers(1, 15), elements=st.integers(-5, 5)))
    def test_brute_force_and_scipy(self, f, g):
        got = ks_complement(f[:, None], g[:, None])
        assert got == pytest.approx(1 - brute_force_ks(f, g), abs=1e-12)
        assert got == pytest.approx(1 - ks_2samp(f, g).statistic, abs=1e-12)


class TestCloaking:
    def test_worked_example(self):
        lc = local_cloaking(np.array([[0.0], [10.0]]), np.array([[9.0], [1.0]]))
        assert lc.tolist() == [1, 1]

    def test_identical(self, rng):
        F = rng.normal(size=(8, 3))
        assert local_cloaking(F, F).tolist() == [0] * 8

    def test_brute_force(self, rng):
        for _ in range(100):
            F, G = rng.normal(size=(10, 3)), rng.normal(size=(10, 3))
            lc = local_cloaking(F, G)
            assert np.array_equal(lc, brute_force_cloaking(F, G))
            assert lc.max() <= 9
            perm = rng.permutation(10)
            assert np.array_equal(local_cloaking(F[perm], G[perm]), lc[perm])

    def test_shape(self):
        with pytest.raises(ShapeMismatch):
            local_cloaking(np.ones((3, 2)), np.ones((4, 2)))

    def test_hidden_rate(self):
        assert hidden_rate([0, 1, 3, 0]) == 0.5
        assert hidden_rate([0, 0]) == 0


class TestEvaluate:
    def test_self_comparison(self, rng):
        F = rng.normal(size=(12, 4))
        report = evaluate(F, F)
        assert report.rv == pytest.approx(1, abs=1e-12)
        assert report.rho_mean == report.rho_sd == report.rho_distr == 1
        assert report.hidden_rate == 0
        assert set(report.frobenius) == set(range(1, 12)) and not any(report.frobenius.values())

    def test_unpaired_omits_fields(self, rng):
        d = evaluate(rng.normal(size=(10, 3)), rng.normal(size=(10, 3)), paired=False).to_dict()
        assert d["frobenius_mode"] == "heuristic"
        assert not {"rv", "local_cloaking", "hidden_rate", "mean_local_cloaking"} & set(d)
        jsonschema.validate(d, REPORT_SCHEMA)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.integers(4, 15))
    def test_ranges_and_schema(self, seed, n):
        rng = np.random.default_rng(seed)
        d = evaluate(rng.normal(size=(n, 3)), rng.normal(size=(n, 3))).to_dict()
        jsonschema.validate(d, REPORT_SCHEMA)
        assert all(0 <= v <= n for v in d["local_cloaking"])

    def test_k_range(self, rng):
        F = rng.normal(size=(10, 2))
        assert list(evaluate(F, F, k_range=range(3, 5)).frobenius) == [3, 4]
        with pytest.raises(SizeMismatch):
            evaluate(F, F[:5])
