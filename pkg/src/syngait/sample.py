"""Container for a sample of unit quaternion time series on a shared grid."""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import GridMismatch
from .quaternion import as_unit


def default_grid(p):
    """Stride-percentage grid with ``p`` points spanning 0..100."""
    return np.linspace(0.0, 100.0, p)


def check_grid(grid, p=None):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1:
        raise GridMismatch("time grid must be one-dimensional")
    if p is not None and grid.shape[0] != p:
        raise GridMismatch(f"time grid has {grid.shape[0]} points but the series have {p}")
    if grid.shape[0] > 1 and not np.all(np.diff(grid) > 0):
        raise GridMismatch("time grid must be strictly increasing")
    return grid


@dataclass
class QtsSample:
    """``n`` unit QTS sharing one time grid.

    Attributes
    ----------
    grid : ndarray of shape (p,)
    values : ndarray of shape (n, p, 4)
        Quaternions in ``(w, x, y, z)`` order, renormalized on construction.
    ids : list of str
    """

    grid: np.ndarray
    values: np.ndarray
    ids: list = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 3 or values.shape[-1] != 4:
            raise ValueError(f"values must have shape (n, p, 4), got {values.shape}")
        if values.shape[0] < 2:
            raise ValueError("a QTS sample needs at least two subjects")
        self.values = as_unit(values)
        self.grid = check_grid(self.grid, values.shape[1])
        if self.ids is None:
            self.ids = [f"S{i + 1:03d}" for i in range(values.shape[0])]
        self.ids = [str(s) for s in self.ids]
        if len(self.ids) != values.shape[0]:
            raise ValueError("one id per subject is required")

    @property
    def n_subjects(self):
        return self.values.shape[0]

    @property
    def n_points(self):
        return self.values.shape[1]
