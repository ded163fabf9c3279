"""Unit-quaternion algebra on arrays of shape ``(..., 4)`` in ``(w, x, y, z)`` order.

All functions broadcast over leading axes. Tangent vectors live in the Lie
algebra at the identity and have shape ``(..., 3)``.
"""

import numpy as np

from .exceptions import AntipodalInput, NoConvergence, NormViolation

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])

NORM_TOL = 1e-6
SMALL = 1e-12
ANTIPODE_TOL = 1e-13  # cos(pi - 1e-6) = -1 + 5e-13 must stay invertible
FRECHET_TOL = 1e-10
FRECHET_MAX_ITER = 200


def as_unit(q, tol=NORM_TOL):
    """Validate and renormalize quaternions.

    Norms within ``tol`` of 1 are rescaled to exactly unit length, anything
    further away raises :class:`NormViolation`.
    """
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 4:
        raise ValueError(f"quaternions need a trailing axis of size 4, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise NormViolation("quaternion components must be finite")
    norm = np.linalg.norm(q, axis=-1, keepdims=True)
    bad = np.abs(norm - 1.0) > tol
    if np.any(bad):
        worst = float(np.max(np.abs(norm - 1.0)))
        raise NormViolation(f"quaternion norm deviates from 1 by {worst:.3g} (tolerance {tol:g})")
    return q / norm


def conjugate(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


inverse = conjugate


def multiply(p, q):
    """Hamilton product ``p * q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def positive_w(q):
    """Flip quaternions with negative scalar part; the rotation is unchanged."""
    q = np.asarray(q, dtype=float)
    return np.where(q[..., :1] < 0, -q, q)


def sign_align(qs, reference):
    """Replace ``q`` by ``-q`` wherever its dot product with ``reference`` is negative."""
    qs = np.asarray(qs, dtype=float)
    dots = np.sum(qs * np.asarray(reference, dtype=float), axis=-1, keepdims=True)
    return np.where(dots < 0, -qs, qs)


def quat_log(q):
    """Logarithmic map to the Lie algebra.

    Returns ``arccos(w) / |u| * u`` with ``u`` the vector part. The angle is
    evaluated as ``atan2(|u|, w)``, which is the same quantity on the unit
    sphere but keeps full precision near the identity.
    """
    q = np.asarray(q, dtype=float)
    w = q[..., 0]
    bad = w <= -1.0 + ANTIPODE_TOL
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0]) if q.ndim > 1 else None
        raise AntipodalInput(f"logarithm undefined at the antipode of the identity (index {idx})", index=idx)
    u = q[..., 1:]
    unorm = np.linalg.norm(u, axis=-1)
    angle = np.arctan2(unorm, w)
    safe = np.where(unorm < SMALL, 1.0, unorm)
    scale = np.where(unorm < SMALL, 0.0, angle / safe)
    return u * scale[..., None]


def quat_exp(v):
    """Exponential map from the Lie algebra: ``cos|v| + sin|v|/|v| * v``."""
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v, axis=-1)
    # np.sinc(x) = sin(pi x) / (pi x), so this is sin(theta) / theta with the limit 1 at 0
    sinc = np.where(theta < SMALL, 1.0, np.sinc(theta / np.pi))
    return np.concatenate([np.cos(theta)[..., None], v * sinc[..., None]], axis=-1)


def geodesic_distance(q1, q2):
    """``|log(q1^-1 q2)|`` with the relative rotation taken in the ``w >= 0`` hemisphere."""
    rel = positive_w(multiply(conjugate(q1), q2))
    return np.linalg.norm(quat_log(rel), axis=-1)


def frechet_mean(qs, tol=FRECHET_TOL, max_iter=FRECHET_MAX_ITER):
    """Fréchet mean of unit quaternions under the geodesic distance.

    Parameters
    ----------
    qs : array_like of shape (n, 4) or (n, m, 4)
        Points to average. With a middle axis, ``m`` independent means are
        computed at once (one per column).
    tol : float
        Stop once the norm of the tangent-space average drops below ``tol``.
    max_iter : int
        Iteration cap.

    Returns
    -------
    ndarray of shape (4,) or (m, 4)
        Unit quaternion(s) with non-negative scalar part.
    """
    qs = np.asarray(qs, dtype=float)
    if qs.ndim < 2 or qs.shape[0] < 1:
        raise ValueError("frechet_mean needs at least one quaternion")
    qs = sign_align(qs, qs[0])
    mean = qs[0].copy()
    for _ in range(max_iter):
        rel = positive_w(multiply(conjugate(mean)[None], qs))
        step = quat_log(rel).mean(axis=0)
        step_norm = np.linalg.norm(step, axis=-1)
        mean = multiply(mean, quat_exp(step))
        mean = mean / np.linalg.norm(mean, axis=-1, keepdims=True)
        if np.all(step_norm < tol):
            return positive_w(mean)
    stuck = np.atleast_1d(step_norm >= tol).nonzero()[0].tolist()
    raise NoConvergence(f"Fréchet mean did not converge after {max_iter} iterations (columns {stuck})")


def center_sample(values):
    """Pointwise Fréchet centering of a sample of QTS.

    Parameters
    ----------
    values : ndarray of shape (n, p, 4)

    Returns
    -------
    mean_qts : ndarray of shape (p, 4)
    centered : ndarray of shape (n, p, 4)
        ``mean_qts[k]^-1 * values[i, k]`` with non-negative scalar part.
    """
    values = np.asarray(values, dtype=float)
    try:
        mean_qts = frechet_mean(values)
    except NoConvergence as exc:
        raise NoConvergence(f"centering failed: {exc}") from exc
    centered = positive_w(multiply(conjugate(mean_qts)[None], values))
    return mean_qts, centered


def to_log_qts(centered):
    """Elementwise logarithm of a centered sample, shape ``(n, p, 3)``."""
    centered = np.asarray(centered, dtype=float)
    try:
        return quat_log(centered)
    except AntipodalInput as exc:
        raise AntipodalInput(f"centered sample has an antipodal value at (subject, time) = {exc.index}",
                             index=exc.index) from exc
