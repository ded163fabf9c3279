"""Nearest-neighbour Dirichlet score synthesis and the end-to-end QTS synthesizer."""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import cdist, pdist
from sklearn.base import BaseEstimator, clone
from sklearn.utils.validation import check_is_fitted

from ._validation import check_generator, check_scores
from .exceptions import EmptyGrid, InvalidConfig, SynGaitError
from .functional import QtsFPCA
from .sample import QtsSample

ZERO_DISTANCE_FLOOR = 1e-9
DEFAULT_ALPHA0 = 5.0
DEFAULT_INERTIA = 0.95
MODES = ("dirichlet", "deterministic")


def default_gamma(n):
    """About a tenth of the sample size, never below 2 (and at most ``n - 1``)."""
    # half-up rounding; the builtin round would send n = 25 to 2
    return int(min(max(2, (n + 5) // 10), n - 1))


@dataclass(frozen=True)
class SynthesisConfig:
    gamma: int
    tau: int
    alpha0: float = DEFAULT_ALPHA0
    seed: int = 0
    mode: str = "dirichlet"

    def validate(self, n, n_columns=None):
        n_columns = n - 1 if n_columns is None else n_columns
        if not 1 <= int(self.gamma) <= n - 1:
            raise InvalidConfig(f"gamma must be in [1, {n - 1}], got {self.gamma}")
        if not 1 <= int(self.tau) <= n_columns:
            raise InvalidConfig(f"tau must be in [1, {n_columns}], got {self.tau}")
        if not (np.isfinite(self.alpha0) and self.alpha0 > 0):
            raise InvalidConfig(f"alpha0 must be positive, got {self.alpha0}")
        if self.mode not in MODES:
            raise InvalidConfig(f"mode must be one of {MODES}, got {self.mode!r}")
        return self


class Neighbors(NamedTuple):
    indices: np.ndarray
    distances: np.ndarray


def knn_search(scores, tau, gamma):
    """``gamma`` nearest other rows of ``scores[:, :tau]``, ties broken by smaller index."""
    scores = np.asarray(scores, dtype=float)
    n, m = scores.shape
    if not 1 <= gamma <= n - 1 or not 1 <= tau <= m:
        raise InvalidConfig(f"need 1 <= gamma <= {n - 1} and 1 <= tau <= {m}, got gamma={gamma}, tau={tau}")
    D = cdist(scores[:, :tau], scores[:, :tau])
    np.fill_diagonal(D, np.inf)
    order = np.argsort(D, axis=1, kind="stable")[:, :gamma]
    return Neighbors(order, np.take_along_axis(D, order, axis=1))


def floor_distances(distances, reference):
    """Replace zero distances by ``1e-9`` times the median positive pairwise distance."""
    reference = np.asarray(reference, dtype=float)
    positive = reference[reference > 0]
    floor = ZERO_DISTANCE_FLOOR * (np.median(positive) if positive.size else 1.0)
    return np.maximum(distances, floor)


def concentration_params(distances, alpha0):
    """Dirichlet parameters proportional to inverse distances, summing to ``alpha0``."""
    inv = 1.0 / np.asarray(distances, dtype=float)
    return alpha0 * (inv / inv.sum(axis=-1, keepdims=True))


def sample_weights(alpha, rng):
    """Dirichlet draws via normalized Gamma variates, one per row of ``alpha``.

    Gamma variates are generated in log space as ``G(a + 1) * U**(1/a)`` so
    that tiny concentrations do not underflow to an all-zero vector.
    """
    alpha = np.asarray(alpha, dtype=float)
    log_g = np.log(rng.standard_gamma(alpha + 1.0)) + np.log(rng.uniform(size=alpha.shape)) / alpha
    log_g -= log_g.max(axis=-1, keepdims=True)
    w = np.exp(log_g)
    return w / w.sum(axis=-1, keepdims=True)


@dataclass
class AvatarDraw:
    """One synthesis run: neighbours, concentrations, weights and synthetic scores."""

    neighbors: Neighbors
    alphas: np.ndarray
    weights: np.ndarray
    scores: np.ndarray


def _combine(scores, indices, weights):
    # explicit products and sum: einsum may reassociate and lose bit-exactness when gamma = 1
    return np.sum(weights[..., None] * scores[indices], axis=1)


def avatar_draw(scores, gamma, tau, alpha0, rng=None, mode="dirichlet", neighbors=None):
    scores = np.asarray(scores, dtype=float)
    if neighbors is None:
        neighbors = knn_search(scores, tau, gamma)
    d = floor_distances(neighbors.distances, pdist(scores[:, :tau]))
    alphas = concentration_params(d, alpha0)
    if mode == "deterministic":
        weights = alphas / alphas.sum(axis=-1, keepdims=True)
    elif mode == "dirichlet":
        weights = sample_weights(alphas, check_generator(rng))
    else:
        raise InvalidConfig(f"unknown mode {mode!r}")
    return AvatarDraw(neighbors, alphas, weights, _combine(scores, neighbors.indices, weights))


def synthesize_scores(scores, cfg, rng=None):
    """Synthetic score matrix, one row per original row.

    Neighbours are searched on the first ``cfg.tau`` columns, weights are
    applied to full rows.
    """
    scores = check_scores(scores)
    cfg.validate(scores.shape[0], scores.shape[1])
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    return avatar_draw(scores, cfg.gamma, cfg.tau, cfg.alpha0, rng, cfg.mode).scores


def score_distance_stats(scores, synthetic):
    """``(d_min, d_max)`` between synthetic rows and original/synthetic pairs."""
    S = cdist(synthetic, synthetic)
    np.fill_diagonal(S, np.inf)
    d_min = min(S.min(), cdist(scores, synthetic).min())
    np.fill_diagonal(S, -np.inf)
    return float(d_min), float(S.max())


class AvatarSynthesizer(BaseEstimator):
    """Score synthesizer: each row becomes a Dirichlet-weighted average of its neighbours.

    Parameters
    ----------
    gamma : int, optional
        Number of neighbours; defaults to about n / 10 (at least 2).
    tau : int, optional
        Number of leading columns used for the neighbour search; all by default.
    alpha0 : float, default=5.0
        Total Dirichlet concentration.
    mode : {'dirichlet', 'deterministic'}
        ``deterministic`` replaces each draw by its expectation.
    random_state : int, Generator or None
    """

    def __init__(self, gamma=None, tau=None, alpha0=DEFAULT_ALPHA0, mode="dirichlet", random_state=None):
        self.gamma = gamma
        self.tau = tau
        self.alpha0 = alpha0
        self.mode = mode
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_scores(X)
        n, m = X.shape
        gamma = default_gamma(n) if self.gamma is None else int(self.gamma)
        tau = m if self.tau is None else int(self.tau)
        self.config_ = SynthesisConfig(gamma, tau, float(self.alpha0), mode=self.mode).validate(n, m)
        self.scores_ = X
        self.neighbors_ = knn_search(X, tau, gamma)
        self.n_features_in_ = m
        self._rng = check_generator(self.random_state)
        return self

    def draw(self, random_state=None):
        check_is_fitted(self, "scores_")
        rng = self._rng if random_state is None else check_generator(random_state)
        c = self.config_
        return avatar_draw(self.scores_, c.gamma, c.tau, c.alpha0, rng, c.mode, self.neighbors_)

    def sample(self, n_samples=None, random_state=None):
        check_is_fitted(self, "scores_")
        if n_samples is not None and n_samples != self.scores_.shape[0]:
            raise InvalidConfig("the avatar method yields exactly one synthetic row per original row")
        return self.draw(random_state).scores


@dataclass
class SynGaitResult:
    synthetic: QtsSample
    fpca: QtsFPCA
    scores: np.ndarray
    synthetic_scores: np.ndarray
    draw: AvatarDraw = None

    @property
    def model(self):
        return self.fpca.model_

    @property
    def mean_qts(self):
        return self.fpca.mean_qts_


def _staged(stage, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except SynGaitError as exc:
        exc.args = (f"[{stage}] {exc.args[0] if exc.args else ''}",) + exc.args[1:]
        raise


class SynGait(BaseEstimator):
    """End-to-end synthesizer of unit quaternion time series.

    The sample is reduced to functional scores with :class:`QtsFPCA`, new
    scores are drawn by a score synthesizer and mapped back to unit QTS.

    Parameters
    ----------
    gamma, tau, alpha0, mode
        Passed to :class:`AvatarSynthesizer`. ``tau=None`` picks the smallest
        number of components reaching 95% of the inertia.
    include_mean : bool, default=True
        Forwarded to :class:`QtsFPCA`.
    synthesizer : estimator, optional
        Any object with ``fit(scores)`` and ``sample(n_samples, random_state)``,
        e.g. :class:`~syngait.copula.GaussianCopulaSynthesizer`. Overrides the
        avatar parameters.
    grid : array_like, optional
    random_state : int, Generator or None
    """

    def __init__(self, gamma=None, tau=None, alpha0=DEFAULT_ALPHA0, mode="dirichlet", include_mean=True,
                 synthesizer=None, grid=None, random_state=None):
        self.gamma = gamma
        self.tau = tau
        self.alpha0 = alpha0
        self.mode = mode
        self.include_mean = include_mean
        self.synthesizer = synthesizer
        self.grid = grid
        self.random_state = random_state

    def fit(self, X, y=None):
        self.fpca_ = _staged("mfpca", QtsFPCA(grid=self.grid, include_mean=self.include_mean).fit, X)
        scores = self.fpca_.scores_
        if self.synthesizer is None:
            tau = self.fpca_.model_.components_for_inertia(DEFAULT_INERTIA) if self.tau is None else self.tau
            self.synthesizer_ = AvatarSynthesizer(self.gamma, tau, self.alpha0, self.mode)
        else:
            self.synthesizer_ = clone(self.synthesizer)
        _staged("score synthesis", self.synthesizer_.fit, scores)
        self.ids_ = list(X.ids) if isinstance(X, QtsSample) else [f"S{i + 1:03d}" for i in range(scores.shape[0])]
        self._rng = check_generator(self.random_state)
        return self

    def sample_result(self, random_state=None):
        check_is_fitted(self, "fpca_")
        rng = self._rng if random_state is None else check_generator(random_state)
        n = self.fpca_.scores_.shape[0]
        draw = None
        if isinstance(self.synthesizer_, AvatarSynthesizer):
            draw = _staged("score synthesis", self.synthesizer_.draw, rng)
            synthetic_scores = draw.scores
        else:
            synthetic_scores = _staged("score synthesis", self.synthesizer_.sample, n, rng)
        values = _staged("reconstruction", self.fpca_.inverse_transform, synthetic_scores)
        synthetic = QtsSample(self.fpca_.grid_, values, [f"syn_{s}" for s in self.ids_])
        return SynGaitResult(synthetic, self.fpca_, self.fpca_.scores_, synthetic_scores, draw)

    def sample(self, random_state=None):
        """Synthetic QTS of shape ``(n, p, 4)``."""
        return self.sample_result(random_state).synthetic.values


def syngait(sample, cfg):
    """Run the full pipeline once with the given :class:`SynthesisConfig`."""
    cfg.validate(sample.n_subjects)
    est = SynGait(cfg.gamma, cfg.tau, cfg.alpha0, cfg.mode).fit(sample)
    return est.sample_result(np.random.default_rng(cfg.seed))


@dataclass
class TuningGrid:
    """Hyper-parameter grid; ``tau=None`` expands to ``1..n-1``."""

    alpha0: tuple = tuple(np.geomspace(0.01, 50.0, 100))
    gamma: tuple = tuple(range(2, 9))
    tau: tuple = None
    repetitions: int = 10
    dmin_fraction: float = 0.10

    def validate(self, n):
        taus = tuple(range(1, n)) if self.tau is None else tuple(self.tau)
        if not self.alpha0 or not self.gamma or not taus:
            raise EmptyGrid("every hyper-parameter grid must be non-empty")
        if self.repetitions < 10:
            raise InvalidConfig(f"at least 10 repetitions are required, got {self.repetitions}")
        if max(self.gamma) > n - 1 or min(self.gamma) < 1:
            raise InvalidConfig(f"gamma values must lie in [1, {n - 1}]")
        if max(taus) > n - 1 or min(taus) < 1:
            raise InvalidConfig(f"tau values must lie in [1, {n - 1}]")
        if min(self.alpha0) <= 0:
            raise InvalidConfig("alpha0 values must be positive")
        if self.dmin_fraction < 0:
            raise InvalidConfig("dmin_fraction must be non-negative")
        return taus


@dataclass(frozen=True)
class TuningRow:
    alpha0: float
    gamma: int
    tau: int
    mean_dmin: float
    mean_dmax: float
    passed: bool


@dataclass
class TuningReport:
    rows: list
    threshold: float
    smallest_original_distance: float
    original_dmax: float = field(default=float("nan"))

    @property
    def best(self):
        return next((r for r in self.rows if r.passed), None)

    def passing(self):
        return [r for r in self.rows if r.passed]


def tune_scores(scores, grid=None, seed=0):
    """Evaluate every ``(alpha0, gamma, tau)`` combination on a fixed score matrix.

    Each repetition uses its own generator derived from ``seed`` and the
    combination's position in the grid, so results do not depend on the order
    of evaluation.
    """
    grid = TuningGrid() if grid is None else grid
    scores = check_scores(scores)
    n = scores.shape[0]
    taus = grid.validate(n)
    original = pdist(scores)
    smallest = float(original.min())
    threshold = grid.dmin_fraction * smallest
    rows = []
    for ig, gamma in enumerate(grid.gamma):
        for it, tau in enumerate(taus):
            nb = knn_search(scores, int(tau), int(gamma))
            d = floor_distances(nb.distances, pdist(scores[:, : int(tau)]))
            for ia, alpha0 in enumerate(grid.alpha0):
                alphas = concentration_params(d, float(alpha0))
                stats = []
                for rep in range(grid.repetitions):
                    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(ia, ig, it, rep)))
                    synthetic = _combine(scores, nb.indices, sample_weights(alphas, rng))
                    stats.append(score_distance_stats(scores, synthetic))
                dmin, dmax = np.mean(stats, axis=0)
                rows.append(TuningRow(float(alpha0), int(gamma), int(tau), float(dmin), float(dmax),
                                      bool(dmin >= threshold)))
    rows.sort(key=lambda r: -r.mean_dmax)
    return TuningReport(rows, threshold, smallest, float(original.max()))


def tune_hyperparameters(sample, grid=None, seed=0):
    """Fit the functional PCA once, then grid-search the avatar hyper-parameters."""
    fpca = QtsFPCA().fit(sample)
    return tune_scores(fpca.scores_, grid, seed)
