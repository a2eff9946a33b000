"""Divergence core: generators, scalers and the gauge-scaled identity.

A generator ``phi`` induces the distortion

    D_phi(x || y) = phi(x) - phi(y) - <x - y, grad phi(y)>,

where ``<.,.>`` is the Euclidean pairing for vectors and the trace pairing
for symmetric matrices.  Scaling ``phi`` by a nonvanishing gauge ``g``,

    phi_dag(x) = g(x) * phi(x / g(x)),

turns a divergence over gauge-normalised points into a plain distortion over
raw points:

    g(x) * D_phi(x/g(x) || y/g(y)) = D_phi_dag(x || y),

which holds exactly iff ``g`` is affine or ``phi`` satisfies the restricted
Euler condition ``phi(z) = <z, grad phi(z)>`` on the image of the
normalisation map.  This module houses the construction, its closed-form
gradient, the identity verifier, the deep (multi-level) composition and the
exponential-family KL shortcut.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ArgumentError, DomainError, IdentityPreconditionError, ShapeError

# Absolute residual below which the restricted Euler condition is accepted
# when verifying the scaled identity on a concrete pair of points.
HOMOGENEITY_TOL = 1e-8


def _pair(a: np.ndarray, b: np.ndarray) -> float:
    """Inner product: dot for vectors, trace pairing for matrices."""
    return float(np.sum(a * b))


class Generator:
    """A differentiable scalar function with evaluation, gradient and domain.

    Parameters
    ----------
    value : callable
        Maps a point (1-d or 2-d ndarray) to a float.
    grad : callable
        Maps a point to its gradient, an array of the same shape.
    domain : callable, optional
        Membership predicate; ``None`` means the whole space.
    name : str
        Used in error messages.
    """

    def __init__(self, value: Callable, grad: Callable, domain: Callable | None = None,
                 name: str = "generator"):
        self._value = value
        self._grad = grad
        self._domain = domain
        self.name = name

    def __call__(self, x: np.ndarray) -> float:
        return float(self._value(np.asarray(x, dtype=float)))

    def grad(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._grad(np.asarray(x, dtype=float)), dtype=float)

    def in_domain(self, x: np.ndarray) -> bool:
        if self._domain is None:
            return bool(np.all(np.isfinite(x)))
        x = np.asarray(x, dtype=float)
        return bool(np.all(np.isfinite(x))) and bool(self._domain(x))

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


class Scaler(Generator):
    """A nonvanishing differentiable scalar function used as a gauge.

    ``is_affine`` marks gauges of the form ``a^T x + b`` (trace-affine for
    matrices), for which the scaled identity holds with no condition on the
    generator.
    """

    def __init__(self, value, grad, domain=None, name="scaler", is_affine: bool = False):
        super().__init__(value, grad, domain, name)
        self.is_affine = is_affine

    def __call__(self, x) -> float:
        g = super().__call__(x)
        if g == 0.0:
            raise DomainError(f"scaler {self.name!r} vanishes at the given point")
        return g


class ScaledGenerator(Generator):
    """The gauge-scaled generator ``x -> g(x) * phi(x / g(x))``.

    The gradient uses the closed form

        grad(y) = grad phi(v) + (phi(v) - <v, grad phi(v)>) * grad g(y),

    with ``v = y / g(y)``; finite differences are never used here.
    """

    def __init__(self, base: Generator, scaler: Scaler):
        self.base = base
        self.scaler = scaler
        name = f"{base.name}^({scaler.name})"
        super().__init__(self._eval, self._closed_form_grad, self._in_domain, name)

    def _scaled_point(self, x: np.ndarray) -> np.ndarray:
        return x / self.scaler(x)

    def _eval(self, x: np.ndarray) -> float:
        return self.scaler(x) * self.base(self._scaled_point(x))

    def _closed_form_grad(self, y: np.ndarray) -> np.ndarray:
        v = self._scaled_point(y)
        gv = self.base.grad(v)
        slack = self.base(v) - _pair(v, gv)
        return gv + slack * self.scaler.grad(y)

    def _in_domain(self, x: np.ndarray) -> bool:
        if not self.scaler.in_domain(x):
            return False
        g = Generator.__call__(self.scaler, x)
        return g != 0.0 and self.base.in_domain(x / g)


def scaled_generator(gen: Generator, g: Scaler) -> ScaledGenerator:
    """Build the scaled generator for base ``gen`` and gauge ``g``."""
    return ScaledGenerator(gen, g)


def _check_domain(gen: Generator, x: np.ndarray, label: str) -> None:
    if not gen.in_domain(x):
        raise DomainError(f"argument {label!r} outside the domain of {gen.name!r}")


def bregman_divergence(gen: Generator, x: np.ndarray, y: np.ndarray) -> float:
    """Distortion ``phi(x) - phi(y) - (x - y)^T grad phi(y)`` on vectors.

    Nonnegative when ``gen`` is convex; may be negative for scaled
    generators whose gauge changes sign.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_domain(gen, x, "x")
    _check_domain(gen, y, "y")
    return gen(x) - gen(y) - _pair(x - y, gen.grad(y))


def check_symmetric(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate symmetry within 1e-12 relative and return the symmetrised copy."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")
    tol = 1e-12 * np.maximum(1.0, np.abs(a))
    if np.any(np.abs(a - a.T) > tol):
        raise ShapeError(f"{name} is not symmetric within tolerance")
    return 0.5 * (a + a.T)


def trace_divergence(gen: Generator, x: np.ndarray, y: np.ndarray) -> float:
    """Trace distortion ``phi(X) - phi(Y) - tr(grad phi(Y)^T (X - Y))``."""
    x = check_symmetric(x, "x")
    y = check_symmetric(y, "y")
    _check_domain(gen, x, "x")
    _check_domain(gen, y, "y")
    return gen(x) - gen(y) - _pair(x - y, gen.grad(y))


def homogeneity_residual(gen: Generator, z: np.ndarray) -> float:
    """Residual of the restricted Euler condition ``|phi(z) - <z, grad phi(z)>|``."""
    z = np.asarray(z, dtype=float)
    return abs(gen(z) - _pair(z, gen.grad(z)))


def check_restricted_homogeneity(gen: Generator, g: Scaler,
                                 samples: Sequence[np.ndarray]) -> float:
    """Max Euler residual of ``gen`` over the gauge-normalised samples.

    Each sample ``x`` is mapped to ``z = x / g(x)`` before the residual is
    taken; a zero residual on the whole image is what licenses the scaled
    identity for non-affine gauges.
    """
    samples = list(samples)
    if not samples:
        raise ArgumentError("need at least one sample")
    worst = 0.0
    for x in samples:
        x = np.asarray(x, dtype=float)
        if not g.in_domain(x):
            raise DomainError("sample outside scaler domain")
        worst = max(worst, homogeneity_residual(gen, x / g(x)))
    return worst


class IdentityCheck(NamedTuple):
    lhs: float
    rhs: float
    absdiff: float


def verify_scaled_identity(gen: Generator, g: Scaler, x: np.ndarray, y: np.ndarray,
                           check_preconditions: bool = True) -> IdentityCheck:
    """Evaluate both sides of the scaled-divergence identity at ``(x, y)``.

    lhs = ``g(x) * D_phi(x/g(x) || y/g(y))``, rhs = ``D_phi_dag(x || y)``.
    The identity is an iff: with ``check_preconditions=False`` callers can
    probe deliberately violating pairs and inspect ``absdiff``.

    Raises
    ------
    IdentityPreconditionError
        If ``g`` is not affine and the Euler residual at ``x/g(x)`` or
        ``y/g(y)`` exceeds ``HOMOGENEITY_TOL``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gx, gy = g(x), g(y)
    u, v = x / gx, y / gy
    if check_preconditions and not g.is_affine:
        res = max(homogeneity_residual(gen, u), homogeneity_residual(gen, v))
        if res > HOMOGENEITY_TOL:
            raise IdentityPreconditionError(
                f"gauge {g.name!r} is not affine and the Euler residual {res:.3e} "
                f"exceeds {HOMOGENEITY_TOL:.0e} on the scaled pair")
    lhs = gx * (gen(u) - gen(v) - _pair(u - v, gen.grad(v)))
    dag = ScaledGenerator(gen, g)
    rhs = dag(x) - dag(y) - _pair(x - y, dag.grad(y))
    return IdentityCheck(lhs, rhs, abs(lhs - rhs))


def _compose_gauge(scalers: Sequence[Scaler], level: int, top: int) -> Scaler:
    """Gauge of the ``level``-step composition ending at ``top`` (1-based).

    Recursion: the 1-step gauge is ``g_top``; the j-step gauge multiplies the
    (j-1)-step gauge by ``g_{top-(j-1)}`` evaluated at the point normalised
    by the (j-1)-step gauge.
    """
    if level == 1:
        return scalers[top - 1]
    prev = _compose_gauge(scalers, level - 1, top)
    nxt = scalers[top - level]  # g_{top-(level-1)}, 1-based

    def value(x, _prev=prev, _nxt=nxt, _level=level):
        gp = Generator.__call__(_prev, x)
        if gp == 0.0:
            raise DomainError(f"composed gauge vanishes at recursion depth {_level - 1}")
        return gp * Generator.__call__(_nxt, x / gp)

    def grad(x, _prev=prev, _nxt=nxt):
        gp = Generator.__call__(_prev, x)
        if gp == 0.0:
            raise DomainError("composed gauge vanishes while differentiating")
        u = x / gp
        dgp = _prev.grad(x)
        dnu = _nxt.grad(u)
        h = Generator.__call__(_nxt, u)
        # d/dx [gp * g(x/gp)] via the Jacobian of x -> x/gp(x)
        return dgp * h + dnu - dgp * (_pair(x, dnu) / gp)

    def domain(x, _prev=prev, _nxt=nxt):
        if not _prev.in_domain(x):
            return False
        gp = Generator.__call__(_prev, x)
        return gp != 0.0 and _nxt.in_domain(x / gp)

    # a^T x + b composed with an affine gauge stays affine: a^T x + b * G(x)
    affine = prev.is_affine and nxt.is_affine
    return Scaler(value, grad, domain, name=f"gtilde[{level},{top}]", is_affine=affine)


def deep_compose(gen: Generator, scalers: Sequence[Scaler], level: int,
                 top: int) -> tuple[Scaler, Generator]:
    """Multi-level scaled composition.

    Builds, strictly by recursion, the composed gauge ``gtilde[level, top]``
    and the ``top``-fold scaled generator ``phi_dag(top)`` obtained by
    applying the scalers ``g_1 .. g_top`` innermost-first.  With ``level ==
    top == 1`` this is exactly ``scaled_generator(gen, scalers[0])``.

    Parameters
    ----------
    gen : Generator
        The level-0 generator.
    scalers : sequence of Scaler
        ``g_1 .. g_k``.
    level, top : int
        Indices with ``1 <= level <= top <= len(scalers)``.

    Returns
    -------
    (Scaler, Generator)
        The composed gauge and the ``top``-level scaled generator.
    """
    k = len(scalers)
    if not (1 <= level <= top <= k):
        raise ArgumentError(f"need 1 <= level <= top <= {k}, got ({level}, {top})")
    phi: Generator = gen
    for j in range(top):
        phi = ScaledGenerator(phi, scalers[j])
    return _compose_gauge(scalers, level, top), phi


def expfam_kl_via_scaled(gen: Generator, omega: Scaler, theta: np.ndarray,
                         theta_prime: np.ndarray) -> float:
    """KL divergence between two exponential-family members with
    gauge-normalised natural parameters, computed without integration.

    For a cumulant ``gen`` that satisfies the restricted Euler condition on
    the unit sphere of the norm ``omega``, the KL divergence between the
    members at ``theta/omega(theta)`` and ``theta'/omega(theta')`` equals the
    scaled-generator distortion ``D_phi_dag(theta' || theta)`` divided by
    ``omega(theta')``.  The returned value agrees with the direct route
    ``D_phi(theta'_n || theta_n)`` on normalised parameters.
    """
    theta = np.asarray(theta, dtype=float)
    theta_prime = np.asarray(theta_prime, dtype=float)
    res = check_restricted_homogeneity(gen, omega, [theta, theta_prime])
    if res > HOMOGENEITY_TOL:
        raise IdentityPreconditionError(
            f"cumulant is not 1-homogeneous on the gauge sphere (residual {res:.3e})")
    dag = ScaledGenerator(gen, omega)
    return (dag(theta_prime) - dag(theta)
            - _pair(theta_prime - theta, dag.grad(theta))) / omega(theta_prime)


def finite_difference_grad(fn: Callable, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function; test oracle only.

    Symmetric-matrix inputs are perturbed symmetrically so the trace-pairing
    gradient convention is matched.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    if x.ndim == 2:
        d = x.shape[0]
        for i in range(d):
            for j in range(i, d):
                h = step * max(1.0, abs(x[i, j]))
                xp, xm = x.copy(), x.copy()
                xp[i, j] += h
                xm[i, j] -= h
                if i != j:
                    xp[j, i] += h
                    xm[j, i] -= h
                dd = (fn(xp) - fn(xm)) / (2.0 * h)
                out[i, j] = out[j, i] = dd if i == j else 0.5 * dd
        return out
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        h = step * max(1.0, abs(x[idx]))
        xp = x.copy()
        xm = x.copy()
        xp[idx] += h
        xm[idx] -= h
        out[idx] = (fn(xp) - fn(xm)) / (2.0 * h)
    return out


def squared_euclidean_generator(offset: float = 0.0, d: int | None = None) -> Generator:
    """Generator ``(offset + |x|_2^2) / 2`` of the squared Euclidean distance."""
    return Generator(
        lambda x: 0.5 * (offset + float(np.dot(x, x))),
        lambda x: x.copy(),
        name=f"sqeuclid+{offset:g}",
    )


def euclidean_norm_scaler() -> Scaler:
    """Gauge ``|x|_2`` (domain excludes the origin)."""
    return Scaler(
        lambda x: math.sqrt(float(np.dot(x, x))),
        lambda x: x / math.sqrt(float(np.dot(x, x))),
        domain=lambda x: float(np.dot(x, x)) > 0.0,
        name="l2norm",
    )
