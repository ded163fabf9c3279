import numpy as np
import pytest
from scipy.stats import ks_2samp, spearmanr
from sklearn.exceptions import NotFittedError

from syngait.copula import EmpiricalMarginal, GaussianCopulaSynthesizer, fit_copula, nearest_correlation, sample_copula
from syngait.metrics import ks_complement
from syngait.synthesis import SynGait


def correlated_gaussian(n, r, seed):
    rng = np.random.default_rng(seed)
    return rng.multivariate_normal([0.0, 0.0], [[1.0, r], [r, 1.0]], size=n)


class TestMarginal:
    def test_cdf_quantile(self):
        m = EmpiricalMarginal.from_sample([3.0, 1.0, 2.0, 2.0])
        assert m.cdf(np.array([0.5, 1.0, 2.0, 3.0])).tolist() == [0.0, 0.25, 0.75, 1.0]
        assert m.quantile(np.array([0.01, 0.25, 0.26, 0.75, 0.76, 1.0])).tolist() == [1, 1, 2, 2, 3, 3]

    def test_quantile_inverts_cdf(self, rng):
        m = EmpiricalMarginal.from_sample(rng.normal(size=50))
        assert np.array_equal(m.quantile(m.cdf(m.values)), m.values)


class TestNearestCorrelation:
    def test_repairs_indefinite(self):
        S = np.array([[1.0, 0.9, 0.9], [0.9, 1.0, -0.9], [0.9, -0.9, 1.0]])
        C = nearest_correlation(S)
        np.testing.assert_allclose(np.diag(C), 1.0, atol=1e-14)
        assert np.linalg.eigvalsh(C).min() > 0
        np.linalg.cholesky(C)

    def test_keeps_valid(self):
        S = np.array([[1.0, 0.3], [0.3, 1.0]])
        np.testing.assert_allclose(nearest_correlation(S), S, atol=1e-15)


class TestFit:
    def test_rank_correlated(self):
        x = np.linspace(-3, 3, 500)
        model = fit_copula(np.column_stack([x, np.exp(x)]))
        assert model.correlation[0, 1] > 0.95

    def test_independent(self, rng):
        model = fit_copula(rng.uniform(size=(2000, 2)))
        assert abs(model.correlation[0, 1]) < 0.06

    def test_single_column(self, rng):
        X = rng.normal(size=(40, 1))
        model = fit_copula(X)
        assert model.correlation.shape == (1, 1)
        G = sample_copula(model, 100, rng)
        assert np.isin(G, X).all()

    def test_cholesky_factor(self, rng):
        model = fit_copula(correlated_gaussian(300, 0.6, 1) @ np.array([[1, 0.2, 0], [0, 1, 0.5]]))
        np.testing.assert_allclose(model.cholesky @ model.cholesky.T, model.correlation, atol=1e-12)
        np.testing.assert_allclose(np.diag(model.correlation), 1.0, atol=1e-12)

    def test_constant_columns(self, rng):
        X = np.column_stack([rng.normal(size=20), np.full(20, 4.2), rng.normal(size=20)])
        model = fit_copula(X)
        G = sample_copula(model, 50, rng)
        assert np.all(G[:, 1] == 4.2)
        assert np.all(np.isfinite(G))

    def test_all_constant(self, rng):
        G = sample_copula(fit_copula(np.ones((5, 2))), 3, rng)
        assert np.array_equal(G, np.ones((3, 2)))


class TestSample:
    def test_values_come_from_original(self, rng):
        X = rng.normal(size=(30, 4))
        G = GaussianCopulaSynthesizer(random_state=0).fit(X).sample(500)
        for j in range(4):
            assert np.isin(G[:, j], X[:, j]).all()

    def test_marginal_fidelity(self):
        X = correlated_gaussian(500, 0.7, 2)
        G = GaussianCopulaSynthesizer(random_state=3).fit(X).sample(10_000)
        for j in range(2):
            assert ks_2samp(X[:, j], G[:, j]).statistic < 0.05
        assert ks_complement(X, G) >= 0.9
        assert abs(spearmanr(G[:, 0], G[:, 1])[0] - spearmanr(X[:, 0], X[:, 1])[0]) < 0.1

    def test_identity_correlation_gives_independence(self, rng):
        X = correlated_gaussian(500, 0.8, 4)
        model = fit_copula(X)
        eye = np.eye(2)
        independent = type(model)(model.marginals, eye, eye, model.active, model.constants)
        G = sample_copula(independent, 10_000, rng)
        assert abs(spearmanr(G[:, 0], G[:, 1])[0]) < 0.05

    def test_determinism(self, rng):
        X = rng.normal(size=(30, 3))
        a = GaussianCopulaSynthesizer(random_state=9).fit(X).sample()
        b = GaussianCopulaSynthesizer(random_state=9).fit(X).sample()
        assert a.shape == X.shape and np.array_equal(a, b)

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            GaussianCopulaSynthesizer().sample(3)

    def test_as_pipeline_synthesizer(self, demo):
        est = SynGait(synthesizer=GaussianCopulaSynthesizer(), random_state=0).fit(demo)
        result = est.sample_result()
        assert result.draw is None
        assert result.synthetic.values.shape == demo.values.shape
        np.testing.assert_allclose(np.linalg.norm(result.synthetic.values, axis=-1), 1.0, atol=1e-12)
