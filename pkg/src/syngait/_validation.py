import numpy as np
from sklearn.utils.validation import check_array

from .quaternion import as_unit
from .sample import QtsSample, check_grid, default_grid


def check_qts(X, grid=None):
    """Return ``(values, grid)`` from a :class:`QtsSample` or an ``(n, p, 4)`` array."""
    if isinstance(X, QtsSample):
        return X.values, X.grid
    X = check_array(X, allow_nd=True, ensure_2d=False, dtype=np.float64)
    if X.ndim != 3 or X.shape[-1] != 4:
        raise ValueError(f"expected an array of shape (n_subjects, n_points, 4), got {X.shape}")
    grid = default_grid(X.shape[1]) if grid is None else check_grid(grid, X.shape[1])
    return as_unit(X), grid


def check_scores(F, n_features=None):
    F = check_array(F, dtype=np.float64)
    if n_features is not None and F.shape[1] != n_features:
        raise ValueError(f"expected {n_features} score columns, got {F.shape[1]}")
    return F


def check_generator(random_state):
    """Return a numpy ``Generator`` from ``None``, an int seed or a ``Generator``."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    if random_state is None or isinstance(random_state, (int, np.integer)):
        return np.random.default_rng(random_state)
    raise ValueError("random_state must be None, an int or a numpy Generator")
