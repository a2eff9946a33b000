"""Bregman balls of the second type, first-type bisectors, and their
gauge-scaled equivalences.

Membership in the ball induced by a scaled generator is the same as
membership of the gauge-normalised point in a plain Bregman ball with
rescaled radius, and the scaled bisector maps onto the plain bisector of
the normalised points.  Both facts follow from one residual-scaling
identity, which is checked exactly rather than samplewise where possible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (Generator, HOMOGENEITY_TOL, ScaledGenerator, Scaler,
                   bregman_divergence, homogeneity_residual)
from .errors import DomainError, IdentityPreconditionError

_MEMBERSHIP_SLACK = 1e-12
_SIGN_BAND = 1e-10


@dataclass(frozen=True)
class Ball2:
    """Second-type ball: points whose distortion *from the center* is small.

    Membership is ``D_phi(c || x) <= r``, with the variable in the right
    slot, so these balls need not be convex.
    """

    center: np.ndarray
    radius: float
    gen: Generator

    def __post_init__(self):
        if self.radius < 0.0:
            raise DomainError("radius must be nonnegative")


def ball2_contains(ball: Ball2, x: np.ndarray) -> bool:
    """Membership with a 1e-12 slack on the boundary."""
    return bregman_divergence(ball.gen, ball.center, x) <= ball.radius + _MEMBERSHIP_SLACK


def _require_identity(gen: Generator, g: Scaler, points) -> None:
    if g.is_affine:
        return
    for p in points:
        if homogeneity_residual(gen, np.asarray(p, dtype=float) / g(p)) > HOMOGENEITY_TOL:
            raise IdentityPreconditionError(
                "generator/gauge pair does not satisfy the scaled identity here")


def scaled_ball_equivalence(gen: Generator, g: Scaler, center: np.ndarray,
                            radius: float, samples: Sequence[np.ndarray]) -> float:
    """Fraction of samples on which the two ball-membership tests agree.

    A sample is in the scaled-generator ball of radius ``r`` iff its
    normalisation is in the base-generator ball of radius ``r / g(c)``
    around the normalised center.  Requires a positive gauge on the samples.
    """
    center = np.asarray(center, dtype=float)
    _require_identity(gen, g, [center, *samples])
    gc = g(center)
    if gc <= 0.0 or any(g(x) <= 0.0 for x in samples):
        raise IdentityPreconditionError("ball equivalence needs a positive gauge")
    dag = ScaledGenerator(gen, g)
    ball_dag = Ball2(center, radius, dag)
    ball_base = Ball2(center / gc, radius / gc, gen)
    agree = sum(
        ball2_contains(ball_dag, x) == ball2_contains(ball_base, np.asarray(x) / g(x))
        for x in samples)
    return agree / len(samples)


def bisector1_residual(gen: Generator, x: np.ndarray, y: np.ndarray,
                       z: np.ndarray) -> float:
    """Signed first-type bisector residual ``D(z||x) - D(z||y)``.

    Zero exactly when ``z`` is equidistant from ``x`` and ``y``.
    """
    return bregman_divergence(gen, z, x) - bregman_divergence(gen, z, y)


def _sign_class(v: float) -> int:
    if abs(v) <= _SIGN_BAND:
        return 0
    return 1 if v > 0.0 else -1


def bisector_equivalence(gen: Generator, g: Scaler, x: np.ndarray, y: np.ndarray,
                         samples: Sequence[np.ndarray]) -> float:
    """Fraction of samples whose side of the bisector is gauge-invariant.

    The sign of the scaled-generator residual at ``z`` is compared with the
    sign of the base residual at ``z/g(z)`` against the normalised pair;
    values within 1e-10 of zero count as on-bisector.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _require_identity(gen, g, [x, y, *samples])
    dag = ScaledGenerator(gen, g)
    xs, ys = x / g(x), y / g(y)
    agree = 0
    for z in samples:
        z = np.asarray(z, dtype=float)
        s_dag = _sign_class(bisector1_residual(dag, x, y, z))
        s_base = _sign_class(bisector1_residual(gen, xs, ys, z / g(z)))
        agree += s_dag == s_base
    return agree / len(samples)


def residual_scaling_gap(gen: Generator, g: Scaler, x: np.ndarray, y: np.ndarray,
                         z: np.ndarray) -> tuple[float, float]:
    """Both sides of the exact residual-scaling identity at one triple.

    Returns ``(scaled residual, g(z) * base residual)``; their equality for
    positive gauges implies both the ball and the bisector equivalences.
    """
    z = np.asarray(z, dtype=float)
    dag = ScaledGenerator(gen, g)
    lhs = bisector1_residual(dag, np.asarray(x, float), np.asarray(y, float), z)
    gz = g(z)
    rhs = gz * bisector1_residual(gen, np.asarray(x, float) / g(x),
                                  np.asarray(y, float) / g(y), z / gz)
    return lhs, rhs
