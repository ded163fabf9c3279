"""Spline representation of log-QTS and multivariate functional PCA.

Curves are discretized on the observation grid and integrated with trapezoid
weights. The three tangent coordinates are stacked into one long weighted
vector per subject, so the eigenproblem of the covariance operator becomes a
weighted PCA of an ``n x 3p`` matrix.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import make_interp_spline
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_qts, check_scores
from .exceptions import DegenerateSample, GridMismatch, GridTooShort, TangentOverflow
from .quaternion import center_sample, conjugate, multiply, positive_w, quat_exp, to_log_qts

INERTIA_FLOOR = 1e-12


@dataclass(frozen=True)
class LogQfd:
    """Natural cubic B-spline interpolant of one subject's log-QTS."""

    grid: np.ndarray
    spline: object

    @property
    def knots(self):
        return self.spline.t

    @property
    def coefficients(self):
        return self.spline.c

    def __call__(self, t):
        return self.spline(np.asarray(t, dtype=float))


def fit_splines(logqts, grid):
    """Interpolate each subject's ``(p, 3)`` tangent curve with a natural cubic spline."""
    logqts = np.asarray(logqts, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if logqts.ndim == 2:
        logqts = logqts[None]
    if grid.shape[0] < 4:
        raise GridTooShort(f"cubic interpolation needs at least 4 grid points, got {grid.shape[0]}")
    if logqts.shape[1] != grid.shape[0]:
        raise GridMismatch(f"log-QTS has {logqts.shape[1]} points, grid has {grid.shape[0]}")
    return [LogQfd(grid, make_interp_spline(grid, v, k=3, bc_type="natural")) for v in logqts]


def trapezoid_weights(grid):
    grid = np.asarray(grid, dtype=float)
    dt = np.diff(grid)
    w = np.zeros_like(grid)
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


def _discretize(data, grid):
    return np.stack([d(grid) for d in data])


def functional_mean(data, grid=None):
    """Pointwise average of the curves, sampled on ``grid`` (default: their own grid)."""
    grid = data[0].grid if grid is None else np.asarray(grid, dtype=float)
    return _discretize(data, grid).mean(axis=0)


@dataclass(frozen=True)
class MfpcaModel:
    """Fitted multivariate functional PCA.

    Attributes
    ----------
    grid : ndarray of shape (p,)
        Quadrature (and observation) grid.
    weights : ndarray of shape (p,)
        Trapezoid weights.
    mean : ndarray of shape (p, 3)
    eigenfunctions : ndarray of shape (r, p, 3)
    eigenvalues : ndarray of shape (r,)
        Non-increasing, non-negative.
    degenerate : bool
        True when every curve was identical.
    """

    grid: np.ndarray
    weights: np.ndarray
    mean: np.ndarray
    eigenfunctions: np.ndarray
    eigenvalues: np.ndarray
    degenerate: bool = False

    @property
    def n_components(self):
        return self.eigenvalues.shape[0]

    def inner(self, f, g):
        """Quadrature inner product of ``(..., p, 3)`` functions."""
        return np.einsum("...kj,...kj,k->...", f, g, self.weights)

    def inertia_percent(self):
        lam = np.where(self.eigenvalues < INERTIA_FLOOR * max(self.eigenvalues[0], 0.0), 0.0,
                       self.eigenvalues) if self.n_components else self.eigenvalues
        total = lam.sum()
        if total <= 0:
            return np.zeros_like(lam)
        return 100.0 * lam / total

    def components_for_inertia(self, fraction):
        """Smallest number of leading components reaching ``fraction`` of the inertia."""
        cum = np.cumsum(self.inertia_percent()) / 100.0
        if cum.size == 0 or cum[-1] <= 0:
            return 1
        return int(min(np.searchsorted(cum, fraction - 1e-12) + 1, cum.size))

    def evaluate_eigenfunctions(self, t):
        """Eigenfunctions at arbitrary times via natural cubic interpolation."""
        spline = make_interp_spline(self.grid, np.moveaxis(self.eigenfunctions, 0, 1), k=3, bc_type="natural")
        return np.moveaxis(spline(np.asarray(t, dtype=float)), 1, 0)


def _fit_mfpca(curves, grid):
    n, p, d = curves.shape
    weights = trapezoid_weights(grid)
    mean = curves.mean(axis=0)
    centered = curves - mean
    sqrt_w = np.sqrt(np.repeat(weights, d))
    Y = centered.reshape(n, p * d) * sqrt_w
    # thin SVD of the weighted data: right singular vectors are the eigenvectors of
    # the discretized covariance operator, without squaring the condition number
    _, s, vt = np.linalg.svd(Y, full_matrices=False)
    r = min(n - 1, p * d)
    phi = vt[:r] / sqrt_w
    lead = np.argmax(np.abs(phi), axis=1)
    signs = np.sign(phi[np.arange(r), lead])
    signs[signs == 0] = 1.0
    phi = phi * signs[:, None]
    eigenvalues = np.maximum(s[:r] ** 2 / (n - 1), 0.0)
    scale = np.sqrt(np.sum(curves.reshape(n, -1) ** 2 * np.repeat(weights, d)))
    degenerate = bool(s.size == 0 or s[0] <= 1e-12 * max(scale, 1.0))
    if degenerate:
        eigenvalues = np.zeros(r)
    model = MfpcaModel(grid=grid, weights=weights, mean=mean, eigenfunctions=phi.reshape(r, p, d),
                       eigenvalues=eigenvalues, degenerate=degenerate)
    scores = _project(curves, model)
    if degenerate:
        warnings.warn("all curves are identical; eigenvalues and scores are zero", DegenerateSample)
        scores = np.zeros_like(scores)
    return model, scores


def _project(curves, model):
    return np.einsum("ikj,rkj,k->ir", curves - model.mean, model.eigenfunctions, model.weights)


def mfpca(data):
    """Multivariate functional PCA of ``n`` :class:`LogQfd`.

    Returns
    -------
    model : MfpcaModel
        With ``n - 1`` components.
    scores : ndarray of shape (n, n - 1)
    """
    if len(data) < 2:
        raise ValueError("mfpca needs at least two curves")
    grid = data[0].grid
    for d in data[1:]:
        if d.grid.shape != grid.shape or not np.array_equal(d.grid, grid):
            raise GridMismatch("all curves must share the same grid")
    return _fit_mfpca(_discretize(data, grid), grid)


def project_scores(datum, model):
    """Scores of one :class:`LogQfd` against a fitted model."""
    if datum.grid.shape != model.grid.shape or not np.allclose(datum.grid, model.grid, rtol=0, atol=1e-12):
        raise GridMismatch("datum is not observed on the model grid")
    return _project(datum(model.grid)[None], model)[0]


def scores_to_tangent(scores, model, include_mean=True):
    """Tangent curves ``sum_j f_j phi_j (+ mean)`` of shape ``(..., p, 3)``."""
    scores = np.asarray(scores, dtype=float)
    r = scores.shape[-1]
    if r > model.n_components:
        raise ValueError(f"got {r} scores but the model has {model.n_components} components")
    tangent = np.tensordot(scores, model.eigenfunctions[:r], axes=(-1, 0))
    if include_mean:
        tangent = tangent + model.mean
    return tangent


def reconstruct_qts(scores, model, mean_qts, grid=None, include_mean=True):
    """Map score vector(s) back to unit QTS: ``mean_qts(t) * exp(tangent(t))``.

    ``scores`` may be a single vector or an ``(m, r)`` matrix; fewer than
    ``n - 1`` scores truncate the expansion.
    """
    if grid is not None and not np.allclose(grid, model.grid, rtol=0, atol=1e-12):
        raise GridMismatch("reconstruction grid differs from the model grid")
    mean_qts = np.asarray(mean_qts, dtype=float)
    if mean_qts.shape != (model.grid.shape[0], 4):
        raise GridMismatch("mean QTS is not on the model grid")
    tangent = scores_to_tangent(scores, model, include_mean)
    norms = np.linalg.norm(tangent, axis=-1)
    if np.any(norms >= np.pi):
        k = int(np.argwhere(norms >= np.pi)[0][-1])
        raise TangentOverflow(f"tangent norm {norms.max():.4g} >= pi at t = {model.grid[k]:g}")
    return positive_w(multiply(mean_qts, quat_exp(tangent)))


class QtsFPCA(TransformerMixin, BaseEstimator):
    """Tangent-space functional PCA of unit quaternion time series.

    ``fit`` centers the sample on its pointwise Fréchet mean, maps it to the
    Lie algebra, interpolates with cubic splines and runs a multivariate
    functional PCA. ``transform`` returns functional scores and
    ``inverse_transform`` maps scores back to unit QTS.

    Parameters
    ----------
    grid : array_like of shape (p,), optional
        Time grid; defaults to ``p`` evenly spaced points on 0..100. Ignored
        when fitting a :class:`~syngait.sample.QtsSample`.
    n_components : int, optional
        Number of score columns returned by ``transform``; all ``n - 1`` by default.
    include_mean : bool, default=True
        Add the functional mean back inside the exponential on reconstruction.

    Attributes
    ----------
    mean_qts_ : ndarray of shape (p, 4)
    model_ : MfpcaModel
    scores_ : ndarray of shape (n, n - 1)
        Full training scores.
    grid_ : ndarray of shape (p,)
    """

    def __init__(self, grid=None, n_components=None, include_mean=True):
        self.grid = grid
        self.n_components = n_components
        self.include_mean = include_mean

    def fit(self, X, y=None):
        values, grid = check_qts(X, self.grid)
        if values.shape[0] < 2:
            raise ValueError("at least two subjects are required")
        self.grid_ = grid
        self.mean_qts_, centered = center_sample(values)
        self.model_, self.scores_ = mfpca(fit_splines(to_log_qts(centered), grid))
        self.n_features_in_ = values.shape[1]
        return self

    def _n_out(self):
        r = self.model_.n_components
        return r if self.n_components is None else min(int(self.n_components), r)

    def fit_transform(self, X, y=None):
        return self.fit(X).scores_[:, : self._n_out()]

    def transform(self, X):
        check_is_fitted(self, "model_")
        values, grid = check_qts(X, self.grid_)
        if values.shape[1] != self.grid_.shape[0] or not np.allclose(grid, self.grid_):
            raise GridMismatch("QTS are not observed on the fitted grid")
        centered = positive_w(multiply(conjugate(self.mean_qts_)[None], values))
        curves = fit_splines(to_log_qts(centered), self.grid_)
        return np.stack([project_scores(c, self.model_) for c in curves])[:, : self._n_out()]

    def inverse_transform(self, F):
        check_is_fitted(self, "model_")
        F = check_scores(np.atleast_2d(F))
        return reconstruct_qts(F, self.model_, self.mean_qts_, include_mean=self.include_mean)
