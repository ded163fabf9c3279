"""Fidelity and privacy metrics on original/synthetic score matrices."""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .exceptions import ExactTooLarge, InvalidK, ShapeMismatch, SizeMismatch, ZeroNorm

EXACT_MAX_N = 8
FROBENIUS_MODES = ("exact", "paired", "heuristic")


def knn_graph(points, k, symmetrize="union"):
    """Adjacency matrix of the undirected k-nearest-neighbour graph.

    Parameters
    ----------
    points : array_like of shape (n, d)
    k : int
        ``1 <= k <= n - 1``.
    symmetrize : {'union', 'mutual'}
        ``union`` links i and j when either is among the other's neighbours,
        ``mutual`` only when both are.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    if not 1 <= k <= n - 1:
        raise InvalidK(f"k must be in [1, {n - 1}], got {k}")
    D = cdist(points, points)
    np.fill_diagonal(D, np.inf)
    nn = np.argsort(D, axis=1, kind="stable")[:, :k]
    directed = np.zeros((n, n), dtype=np.int8)
    directed[np.repeat(np.arange(n), k), nn.ravel()] = 1
    if symmetrize == "union":
        return directed | directed.T
    if symmetrize == "mutual":
        return directed & directed.T
    raise ValueError(f"unknown symmetrization {symmetrize!r}")


def _frobenius(A, B):
    return float(np.sqrt(np.sum((A.astype(float) - B) ** 2)))


def _swap_gains(A, C):
    """Cost decrease of every transposition for symmetric, zero-diagonal ``A`` and ``C``.

    Swapping nodes a and b changes the squared distance by
    ``-4 * (M_ab + M_ba - M_aa - M_bb + 2 A_ab C_ab)`` with ``M = A C``.
    """
    M = A @ C
    d = np.diag(M)
    return 4.0 * (M + M.T - d[:, None] - d[None, :] + 2.0 * A * C)


def _two_swap_descent(A, B):
    """Greedy best-improvement 2-swap search over node permutations, from the identity."""
    A = A.astype(float)
    B = B.astype(float)
    symmetric = np.array_equal(A, A.T) and np.array_equal(B, B.T) and not A.diagonal().any() \
        and not B.diagonal().any()
    n = A.shape[0]
    perm = np.arange(n)
    iu = np.triu_indices(n, 1)
    while True:
        C = B[np.ix_(perm, perm)]
        if symmetric:
            gains = _swap_gains(A, C)[iu]
        else:
            base = np.sum((A - C) ** 2)
            gains = np.empty(iu[0].size)
            for m, (a, b) in enumerate(zip(*iu)):
                trial = perm.copy()
                trial[[a, b]] = trial[[b, a]]
                gains[m] = base - np.sum((A - B[np.ix_(trial, trial)]) ** 2)
        best = int(np.argmax(gains)) if gains.size else 0
        if not gains.size or gains[best] <= 1e-9:
            return _frobenius(A, C), perm
        a, b = iu[0][best], iu[1][best]
        perm[[a, b]] = perm[[b, a]]


def knng_frobenius(A, B, mode="paired"):
    """Frobenius distance between adjacency matrices, minimized over node relabelings.

    ``exact`` enumerates every permutation (n <= 8), ``paired`` keeps the row
    correspondence, ``heuristic`` returns the local optimum of a 2-swap descent,
    which is an upper bound on the exact minimum.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SizeMismatch(f"adjacency shapes differ: {A.shape} vs {B.shape}")
    n = A.shape[0]
    if mode == "paired":
        return _frobenius(A, B)
    if mode == "heuristic":
        return _two_swap_descent(A, B)[0]
    if mode == "exact":
        if n > EXACT_MAX_N:
            raise ExactTooLarge(f"exact permutation search is limited to n <= {EXACT_MAX_N}, got {n}")
        perms = np.array(list(itertools.permutations(range(n))))
        permuted = B[perms[:, :, None], perms[:, None, :]]
        costs = np.sum((A[None].astype(float) - permuted) ** 2, axis=(1, 2))
        return float(np.sqrt(costs.min()))
    raise ValueError(f"mode must be one of {FROBENIUS_MODES}, got {mode!r}")


def rv_coefficient(F, G):
    """RV coefficient with uncentered cross-product matrices ``A^T B / (n - 1)``."""
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    if F.shape[0] != G.shape[0]:
        raise ShapeMismatch("RV coefficient needs the same individuals in both matrices")
    n = F.shape[0]
    S_fg = F.T @ G / (n - 1)
    S_ff = F.T @ F / (n - 1)
    S_gg = G.T @ G / (n - 1)
    denom = np.sum(S_ff * S_ff) * np.sum(S_gg * S_gg)
    if denom == 0:
        raise ZeroNorm("RV coefficient undefined for an all-zero matrix")
    # tr(S_fg S_gf) = ||S_fg||_F^2 and tr(S^2) = ||S||_F^2 for symmetric S
    return float(min(np.sum(S_fg * S_fg) / np.sqrt(denom), 1.0))


_STATISTICS = {
    "mean": lambda x: np.mean(x, axis=0),
    "sd": lambda x: np.std(x, axis=0, ddof=1),
}


def statistic_similarity(F, G, statistic="mean", per_column=False):
    """Column-averaged ``max(0, 1 - |stat(f) - stat(g)| / range(f))``."""
    F = np.atleast_2d(np.asarray(F, dtype=float).T).T
    G = np.atleast_2d(np.asarray(G, dtype=float).T).T
    if F.shape[1] != G.shape[1]:
        raise ShapeMismatch("column counts differ")
    fun = _STATISTICS[statistic]
    diff = np.abs(fun(F) - fun(G))
    rng = np.ptp(F, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        sim = np.where(rng > 0, np.maximum(0.0, 1.0 - diff / rng), (diff == 0).astype(float))
    return sim if per_column else float(sim.mean())


def ks_complement(F, G, per_column=False):
    """Column-averaged ``1 - sup |ECDF_f - ECDF_g|`` over the pooled sample."""
    F = np.atleast_2d(np.asarray(F, dtype=float).T).T
    G = np.atleast_2d(np.asarray(G, dtype=float).T).T
    if F.shape[1] != G.shape[1]:
        raise ShapeMismatch("column counts differ")
    out = np.empty(F.shape[1])
    for k in range(F.shape[1]):
        f, g = np.sort(F[:, k]), np.sort(G[:, k])
        pooled = np.concatenate([f, g])
        cdf_f = np.searchsorted(f, pooled, side="right") / f.size
        cdf_g = np.searchsorted(g, pooled, side="right") / g.size
        out[k] = 1.0 - np.max(np.abs(cdf_f - cdf_g))
    return out if per_column else float(out.mean())


def local_cloaking(F, G):
    """Per original row, the number of synthetic rows strictly closer than its own synthetic row."""
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    if F.shape != G.shape:
        raise ShapeMismatch(f"row-paired matrices must share a shape: {F.shape} vs {G.shape}")
    delta = cdist(F, G)
    return np.sum(delta < np.diag(delta)[:, None], axis=1)


def hidden_rate(lc):
    lc = np.asarray(lc)
    return float(np.mean(lc > 0)) if lc.size else 0.0


@dataclass
class MetricReport:
    frobenius: dict
    rho_mean: float
    rho_sd: float
    rho_distr: float
    frobenius_mode: str
    rv: float = None
    local_cloaking: list = None
    mean_local_cloaking: float = None
    hidden_rate: float = None

    def to_dict(self):
        out = {
            "frobenius": {str(k): float(v) for k, v in self.frobenius.items()},
            "frobenius_mode": self.frobenius_mode,
            "rho_mean": self.rho_mean,
            "rho_sd": self.rho_sd,
            "rho_distr": self.rho_distr,
        }
        if self.rv is not None:
            out.update(
                rv=self.rv,
                local_cloaking=[int(v) for v in self.local_cloaking],
                mean_local_cloaking=self.mean_local_cloaking,
                hidden_rate=self.hidden_rate,
            )
        return out


REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["frobenius", "frobenius_mode", "rho_mean", "rho_sd", "rho_distr"],
    "properties": {
        "frobenius": {
            "type": "object",
            "patternProperties": {"^[0-9]+$": {"type": "number", "minimum": 0}},
            "additionalProperties": False,
        },
        "frobenius_mode": {"enum": list(FROBENIUS_MODES)},
        "rho_mean": {"type": "number", "minimum": 0, "maximum": 1},
        "rho_sd": {"type": "number", "minimum": 0, "maximum": 1},
        "rho_distr": {"type": "number", "minimum": 0, "maximum": 1},
        "rv": {"type": "number", "minimum": 0, "maximum": 1},
        "local_cloaking": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "mean_local_cloaking": {"type": "number", "minimum": 0},
        "hidden_rate": {"type": "number", "minimum": 0, "maximum": 1},
    },
    "dependentRequired": {"rv": ["local_cloaking", "mean_local_cloaking", "hidden_rate"]},
    "additionalProperties": False,
}


def evaluate(F, G, paired=True, k_range=None):
    """Run every metric on original scores ``F`` and synthetic scores ``G``.

    RV and the cloaking metrics need a row correspondence and are only
    computed when ``paired``. The k-NNG sweep uses the identity pairing when
    ``paired`` and the 2-swap heuristic otherwise.
    """
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    if F.shape[0] != G.shape[0]:
        raise SizeMismatch("k-NNG comparison needs the same number of rows")
    n = F.shape[0]
    ks = range(1, n) if k_range is None else k_range
    mode = "paired" if paired else "heuristic"
    frob = {int(k): knng_frobenius(knn_graph(F, k), knn_graph(G, k), mode) for k in ks}
    report = MetricReport(
        frobenius=frob,
        rho_mean=statistic_similarity(F, G, "mean"),
        rho_sd=statistic_similarity(F, G, "sd"),
        rho_distr=ks_complement(F, G),
        frobenius_mode=mode,
    )
    if paired:
        lc = local_cloaking(F, G)
        report.rv = rv_coefficient(F, G)
        report.local_cloaking = lc.tolist()
        report.mean_local_cloaking = float(lc.mean())
        report.hidden_rate = hidden_rate(lc)
    return report
