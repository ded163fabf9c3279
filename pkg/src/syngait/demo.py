"""Seeded synthetic gait-like QTS fixture with three known modes of variation."""

import numpy as np

from .quaternion import multiply, positive_w, quat_exp
from .sample import QtsSample, default_grid

MODE_PERIODS = (100.0, 50.0, 33.0)
MODE_SD = (0.15, 0.08, 0.04)
# orthonormal (sin, cos) direction pairs; each mode has unit tangent norm at every t
_SIN_DIRS = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
_COS_DIRS = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
_CLIP = 3.5


def demo_modes(grid):
    """Mode curves of shape ``(3, p, 3)``."""
    grid = np.asarray(grid, dtype=float)
    out = []
    for period, a, b in zip(MODE_PERIODS, _SIN_DIRS, _COS_DIRS):
        arg = 2 * np.pi * grid / period
        out.append(np.sin(arg)[:, None] * a + np.cos(arg)[:, None] * b)
    return np.stack(out)


def demo_mean_qts(grid):
    grid = np.asarray(grid, dtype=float)
    s = 2 * np.pi * grid / 100.0
    v = np.stack([0.3 * np.sin(s), 0.2 + 0.1 * np.cos(s), -0.25 + 0.05 * np.sin(2 * s)], axis=-1)
    return quat_exp(v)


def generate_demo_sample(n=30, seed=0, p=101):
    """Build ``n`` subjects on a 0..100 grid.

    Tangent curves are random combinations of three smooth modes with
    Gaussian coefficients (clipped at 3.5 sd so every tangent norm stays
    below pi/2), exponentiated and left-multiplied by a fixed mean QTS.
    """
    if n < 3:
        raise ValueError("demo sample needs n >= 3")
    rng = np.random.default_rng(seed)
    grid = default_grid(p)
    coef = rng.standard_normal((n, 3))
    coef = np.clip(coef, -_CLIP, _CLIP) * np.asarray(MODE_SD)
    tangent = np.einsum("im,mkj->ikj", coef, demo_modes(grid))
    values = positive_w(multiply(demo_mean_qts(grid)[None], quat_exp(tangent)))
    return QtsSample(grid=grid, values=values, ids=[f"demo{i + 1:02d}" for i in range(n)])
