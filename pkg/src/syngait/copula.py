"""Gaussian copula with empirical marginals, used as a baseline score synthesizer."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_generator, check_scores
from .exceptions import SingularCorrelation

PSD_JITTER = 1e-8


@dataclass(frozen=True)
class EmpiricalMarginal:
    values: np.ndarray  # sorted sample

    @classmethod
    def from_sample(cls, x):
        return cls(np.sort(np.asarray(x, dtype=float)))

    @property
    def n(self):
        return self.values.shape[0]

    def cdf(self, x):
        """Right-continuous empirical CDF."""
        return np.searchsorted(self.values, x, side="right") / self.n

    def quantile(self, u):
        """Left-continuous generalized inverse: smallest sample value with CDF >= u."""
        # searching the CDF levels k/n avoids ceil(u * n) rounding up past an exact level
        levels = np.arange(1, self.n + 1) / self.n
        idx = np.searchsorted(levels, np.asarray(u, dtype=float), side="left")
        return self.values[np.clip(idx, 0, self.n - 1)]


@dataclass(frozen=True)
class CopulaModel:
    marginals: list
    correlation: np.ndarray
    cholesky: np.ndarray
    active: np.ndarray  # columns modelled by the copula
    constants: np.ndarray  # value of each column, used where inactive

    @property
    def n_features(self):
        return len(self.marginals)


def nearest_correlation(S, jitter=PSD_JITTER):
    """Symmetrize, clip eigenvalues at ``jitter`` and rescale to unit diagonal."""
    S = (S + S.T) / 2
    d = np.sqrt(np.diag(S))
    S = S / np.outer(d, d)
    vals, vecs = np.linalg.eigh(S)
    if vals.min() < jitter:
        S = (vecs * np.maximum(vals, jitter)) @ vecs.T
        d = np.sqrt(np.diag(S))
        S = S / np.outer(d, d)
    return (S + S.T) / 2


def fit_copula(X):
    """Fit empirical marginals and the Gaussian dependence structure of ``X`` (n x p)."""
    X = check_scores(X)
    n, p = X.shape
    if n < 2:
        raise ValueError("copula fitting needs at least two rows")
    marginals = [EmpiricalMarginal.from_sample(X[:, j]) for j in range(p)]
    active = np.ptp(X, axis=0) > 0
    constants = X[0].copy()
    k = int(active.sum())
    if k == 0:
        eye = np.eye(0)
        return CopulaModel(marginals, eye, eye, active, constants)
    # pseudo-observations rescaled by n/(n+1) keep the normal quantile finite
    U = np.column_stack([marginals[j].cdf(X[:, j]) for j in np.flatnonzero(active)]) * n / (n + 1)
    Z = norm.ppf(U)
    S = Z.T @ Z / n
    if np.any(np.diag(S) <= 0) or not np.all(np.isfinite(S)):
        raise SingularCorrelation("degenerate normal scores")
    corr = nearest_correlation(S)
    try:
        L = np.linalg.cholesky(corr)
    except np.linalg.LinAlgError as exc:
        raise SingularCorrelation(f"correlation matrix is not positive definite after repair: {exc}") from exc
    return CopulaModel(marginals, corr, L, active, constants)


def sample_copula(model, m, rng):
    """Draw ``m`` rows: correlated normals, mapped through Phi and the empirical quantiles."""
    out = np.tile(model.constants, (m, 1))
    cols = np.flatnonzero(model.active)
    if cols.size:
        Y = rng.standard_normal((m, cols.size)) @ model.cholesky.T
        U = norm.cdf(Y)
        for c, j in enumerate(cols):
            out[:, j] = model.marginals[j].quantile(U[:, c])
    return out


class GaussianCopulaSynthesizer(BaseEstimator):
    """Tabular synthesizer with empirical marginals and a Gaussian copula.

    Parameters
    ----------
    random_state : int, Generator or None
    """

    def __init__(self, random_state=None):
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_scores(X)
        self.model_ = fit_copula(X)
        self.n_features_in_ = X.shape[1]
        self.n_samples_fit_ = X.shape[0]
        self._rng = check_generator(self.random_state)
        return self

    def sample(self, n_samples=None, random_state=None):
        check_is_fitted(self, "model_")
        n_samples = self.n_samples_fit_ if n_samples is None else int(n_samples)
        rng = self._rng if random_state is None else check_generator(random_state)
        return sample_copula(self.model_, n_samples, rng)
