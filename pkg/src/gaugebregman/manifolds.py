"""Sphere and hyperboloid geometry in tangent-plane coordinates.

Points live in the tangent plane at a fixed pole.  Lifting appends one
coordinate (``r cot r`` on the sphere, ``r coth r`` time-like on the
hyperboloid, ``r`` the Euclidean norm); dividing the lifted vector by the
matching gauge lands on the manifold and coincides with the exponential map
at the pole.  The hyperboloid's extra coordinate is realised as a real
time-like axis: every inner product uses the bilinear form
``<u, v> = sum_{i<=d} u_i v_i - u_{d+1} v_{d+1}``, whose -1 level set is the
hyperboloid.  We place the manifold on the upper sheet; the gauge is
negative but its sign squares away in every distance.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

SPHERE_MAX_RADIUS = np.pi - 1e-9
_SERIES_CUTOFF = 1e-4


def _norm(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.asarray(x, dtype=float) ** 2, axis=-1))


def r_cot_r(r):
    """``r * cot(r)`` with its limit 1 at r -> 0."""
    r = np.asarray(r, dtype=float)
    small = np.abs(r) < _SERIES_CUTOFF
    rs = np.where(small, 1.0, r)
    out = np.where(small, 1.0 - r**2 / 3.0 - r**4 / 45.0,
                   rs * np.cos(rs) / np.sin(rs))
    return out if out.ndim else float(out)


def r_csc_r(r):
    """``r / sin(r)`` with its limit 1 at r -> 0."""
    r = np.asarray(r, dtype=float)
    small = np.abs(r) < _SERIES_CUTOFF
    rs = np.where(small, 1.0, r)
    out = np.where(small, 1.0 + r**2 / 6.0 + 7.0 * r**4 / 360.0, rs / np.sin(rs))
    return out if out.ndim else float(out)


def r_coth_r(r):
    """``r * coth(r)`` with its limit 1 at r -> 0."""
    r = np.asarray(r, dtype=float)
    small = np.abs(r) < _SERIES_CUTOFF
    rs = np.where(small, 1.0, r)
    out = np.where(small, 1.0 + r**2 / 3.0 - r**4 / 45.0,
                   rs * np.cosh(rs) / np.sinh(rs))
    return out if out.ndim else float(out)


def r_csch_r(r):
    """``r / sinh(r)`` with its limit 1 at r -> 0."""
    r = np.asarray(r, dtype=float)
    small = np.abs(r) < _SERIES_CUTOFF
    rs = np.where(small, 1.0, r)
    out = np.where(small, 1.0 - r**2 / 6.0 + 7.0 * r**4 / 360.0, rs / np.sinh(rs))
    return out if out.ndim else float(out)


def minkowski_dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Bilinear form with time-like last coordinate."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    prod = u * v
    return np.sum(prod[..., :-1], axis=-1) - prod[..., -1]


def _check_sphere_radius(r) -> None:
    if np.any(np.asarray(r) >= SPHERE_MAX_RADIUS):
        raise DomainError("tangent point outside the open ball of radius pi")


def lift_sphere(x: np.ndarray) -> np.ndarray:
    """Append the ``r cot r`` coordinate to a tangent point (batched ok)."""
    x = np.asarray(x, dtype=float)
    r = _norm(x)
    _check_sphere_radius(r)
    return np.concatenate([x, np.expand_dims(r_cot_r(r), -1)], axis=-1)


def g_sphere(x: np.ndarray):
    """Gauge ``r / sin r`` of the sphere lift, from tangent coordinates."""
    r = _norm(x)
    _check_sphere_radius(r)
    return r_csc_r(r)


def exp_sphere(x: np.ndarray) -> np.ndarray:
    """Exponential map at the pole: unit vector ``[(sin r / r) x, cos r]``."""
    x = np.asarray(x, dtype=float)
    r = _norm(x)
    _check_sphere_radius(r)
    sinc = 1.0 / r_csc_r(r)
    return np.concatenate([x * np.expand_dims(sinc, -1),
                           np.expand_dims(np.cos(r), -1)], axis=-1)


def log_sphere(p: np.ndarray) -> np.ndarray:
    """Inverse of ``exp_sphere`` on the sphere minus the antipode."""
    p = np.asarray(p, dtype=float)
    nrm = _norm(p)
    if np.any(np.abs(nrm - 1.0) > 1e-8):
        raise DomainError("point is not on the unit sphere")
    if np.any(p[..., -1] <= -1.0 + 1e-12):
        raise DomainError("antipode of the pole has no unique log")
    s = _norm(p[..., :-1])
    # atan2 form is exact on the sphere and well conditioned near the pole
    r = np.arctan2(s, p[..., -1])
    coef = np.where(s > 0.0, r / np.where(s > 0.0, s, 1.0), 1.0)
    return p[..., :-1] * np.expand_dims(coef, -1)


def lift_hyper(x: np.ndarray) -> np.ndarray:
    """Append the time-like ``r coth r`` coordinate to a tangent point."""
    x = np.asarray(x, dtype=float)
    r = _norm(x)
    return np.concatenate([x, np.expand_dims(r_coth_r(r), -1)], axis=-1)


def g_hyper(x: np.ndarray):
    """Gauge ``-r / sinh r`` of the hyperboloid lift."""
    return -r_csch_r(_norm(x))


def exp_hyper(x: np.ndarray) -> np.ndarray:
    """Exponential map at the pole, upper sheet: ``[(sinh r / r) x, cosh r]``."""
    x = np.asarray(x, dtype=float)
    r = _norm(x)
    coef = 1.0 / r_csch_r(r)
    return np.concatenate([x * np.expand_dims(coef, -1),
                           np.expand_dims(np.cosh(r), -1)], axis=-1)


def log_hyper(p: np.ndarray) -> np.ndarray:
    """Inverse of ``exp_hyper`` on the upper sheet."""
    p = np.asarray(p, dtype=float)
    if np.any(np.abs(minkowski_dot(p, p) + 1.0) > 1e-6) or np.any(p[..., -1] < 1.0 - 1e-9):
        raise DomainError("point is not on the upper hyperboloid sheet")
    s = _norm(p[..., :-1])
    r = np.arcsinh(s)
    coef = np.where(s > 0.0, r / np.where(s > 0.0, s, 1.0), 1.0)
    return p[..., :-1] * np.expand_dims(coef, -1)


def geodesic_sphere(x: np.ndarray, y: np.ndarray):
    """Great-circle distance between the embedded tangent points."""
    c = np.sum(exp_sphere(x) * exp_sphere(y), axis=-1)
    d = np.arccos(np.clip(c, -1.0, 1.0))
    return d if d.ndim else float(d)


def geodesic_hyper(x: np.ndarray, y: np.ndarray):
    """Hyperbolic distance between the embedded tangent points."""
    c = -minkowski_dot(exp_hyper(x), exp_hyper(y))
    d = np.arccosh(np.clip(c, 1.0, None))
    return d if d.ndim else float(d)


def d_rec_sphere(x: np.ndarray, c: np.ndarray):
    """Reconstruction loss ``1 - cos D_G`` between tangent points."""
    out = 1.0 - np.sum(exp_sphere(x) * exp_sphere(c), axis=-1)
    return out if out.ndim else float(out)


def d_rec_hyper(x: np.ndarray, c: np.ndarray):
    """Reconstruction loss ``cosh D_G - 1`` between tangent points."""
    out = -minkowski_dot(exp_hyper(x), exp_hyper(c)) - 1.0
    return out if out.ndim else float(out)
