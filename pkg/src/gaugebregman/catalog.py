"""Catalog of generator/gauge pairs with closed-form scaled distortions.

Each entry bundles a convex generator, the gauge that makes the scaled
identity hold, the closed form of the resulting distortion, and a sampler of
valid inputs.  The two manifold rows take tangent-plane inputs and lift
internally; the closed forms of the matrix rows take symmetric positive
definite matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from . import manifolds
from .core import (Generator, Scaler, euclidean_norm_scaler,
                   squared_euclidean_generator, verify_scaled_identity)
from .errors import ArgumentError
from .linalg import sym_eigen, sym_inv, sym_log
from .lms import grad_phi_q, lq_norm


class Row(Enum):
    CosineRowI = "I"
    DualNormRowII = "II"
    SphereRowIII = "III"
    HyperRowIV = "IV"
    SimplexKLRowV = "V"
    GeomISRowVI = "VI"
    VonNeumannRowVII = "VII"
    LogDetRowVIII = "VIII"


@dataclass(frozen=True)
class CatalogEntry:
    """A fully wired generator/gauge family.

    ``closed_form`` takes points in the row's natural coordinates (tangent
    plane for the manifold rows); ``lift`` maps them to the ambient points
    fed to ``gen`` and ``scaler``; ``sample`` draws a valid natural point.
    """

    id: Row
    gen: Generator
    scaler: Scaler
    closed_form: Callable[[np.ndarray, np.ndarray], float]
    domain_desc: str
    params: dict = field(default_factory=dict)
    sample: Callable[[np.random.Generator], np.ndarray] = None
    lift: Callable[[np.ndarray], np.ndarray] = lambda x: x


def _positive_entries(x: np.ndarray) -> bool:
    return bool(np.all(x >= 1e-300))


def _nonzero(x: np.ndarray) -> bool:
    return bool(np.any(x != 0.0))


def kl_generator(name: str = "kl") -> Generator:
    """Generator ``sum x log x - x`` of the (unnormalised) KL divergence on
    the strictly positive orthant."""
    return Generator(
        lambda x: float(np.sum(x * np.log(x) - x)),
        lambda x: np.log(x),
        domain=_positive_entries,
        name=name,
    )


def sum_scaler(d: int) -> Scaler:
    """Affine gauge ``1^T x``."""
    return Scaler(lambda x: float(np.sum(x)), lambda x: np.ones_like(x),
                  domain=lambda x: float(np.sum(x)) != 0.0, name="sum", is_affine=True)


def itakura_saito_generator(d: int) -> Generator:
    """Generator ``-d - sum log x`` of the Itakura-Saito divergence."""
    return Generator(
        lambda x: -d - float(np.sum(np.log(x))),
        lambda x: -1.0 / x,
        domain=_positive_entries,
        name="itakura-saito",
    )


def geometric_mean_scaler(d: int) -> Scaler:
    """Gauge ``(prod x_i)^{1/d}`` on the positive orthant."""
    def value(x):
        return float(np.exp(np.mean(np.log(x))))

    def grad(x):
        return value(x) / (d * x)

    return Scaler(value, grad, domain=_positive_entries, name="geomean")


def lq_generator(q: float, W: float) -> Generator:
    """Generator ``(W^2 + |x|_q^2) / 2``."""
    return Generator(
        lambda x: 0.5 * (W * W + lq_norm(x, q) ** 2),
        lambda x: grad_phi_q(x, q),
        name=f"lq(q={q:g})",
    )


def lq_gauge(q: float, W: float) -> Scaler:
    """Gauge ``|x|_q / W`` normalising onto the L_q ball of radius W."""
    def grad(x):
        n = lq_norm(x, q)
        return np.sign(x) * (np.abs(x) / n) ** (q - 1.0) / W

    return Scaler(lambda x: lq_norm(x, q) / W, grad, domain=_nonzero,
                  name=f"lq_gauge(q={q:g})")


def sphere_lift_generator(d: int) -> Generator:
    """Euclidean quadratic ``(1 + |v|^2)/2`` on lifted sphere coordinates."""
    return Generator(
        lambda v: 0.5 * (1.0 + float(np.dot(v, v))),
        lambda v: v.copy(),
        name="sphere-quadratic",
    )


def sphere_lift_scaler(d: int) -> Scaler:
    """Gauge ``r / sin r`` read off the first d (tangent) coordinates."""
    def value(v):
        return manifolds.g_sphere(v[:-1])

    def grad(v):
        rho = math.sqrt(float(np.dot(v[:-1], v[:-1])))
        if rho < 1e-4:
            coef = 1.0 / 3.0 + 7.0 * rho * rho / 90.0
        else:
            coef = (math.sin(rho) - rho * math.cos(rho)) / (rho * math.sin(rho) ** 2)
        out = np.concatenate([coef * v[:-1], [0.0]])
        return out

    def domain(v):
        return float(np.dot(v[:-1], v[:-1])) < manifolds.SPHERE_MAX_RADIUS ** 2

    return Scaler(value, grad, domain, name="sphere-gauge")


def hyper_lift_generator(d: int) -> Generator:
    """Time-like quadratic ``(-1 + <v,v>)/2`` with the hyperboloid pairing."""
    def grad(v):
        out = v.copy()
        out[-1] = -out[-1]
        return out

    return Generator(
        lambda v: 0.5 * (-1.0 + float(manifolds.minkowski_dot(v, v))),
        grad,
        name="hyper-quadratic",
    )


def hyper_lift_scaler(d: int) -> Scaler:
    """Gauge ``-r / sinh r`` read off the first d (tangent) coordinates."""
    def value(v):
        return manifolds.g_hyper(v[:-1])

    def grad(v):
        rho = math.sqrt(float(np.dot(v[:-1], v[:-1])))
        if rho < 1e-4:
            coef = 1.0 / 3.0 - 7.0 * rho * rho / 90.0
        else:
            coef = (rho * math.cosh(rho) - math.sinh(rho)) / (rho * math.sinh(rho) ** 2)
        return np.concatenate([coef * v[:-1], [0.0]])

    return Scaler(value, grad, name="hyper-gauge")


def von_neumann_generator() -> Generator:
    """Matrix entropy ``tr(X log X - X)`` on positive definite matrices."""
    def value(x):
        lam = sym_eigen(x).eigenvalues
        return float(np.sum(lam * np.log(lam) - lam))

    return Generator(value, sym_log,
                     domain=lambda x: sym_eigen(x).eigenvalues[-1] > 0.0,
                     name="von-neumann")


def trace_scaler() -> Scaler:
    """Affine matrix gauge ``tr X``."""
    return Scaler(lambda x: float(np.trace(x)),
                  lambda x: np.eye(x.shape[0]),
                  domain=lambda x: float(np.trace(x)) != 0.0,
                  name="trace", is_affine=True)


def log_det_generator(d: int) -> Generator:
    """Burg generator ``-d - log det X`` on positive definite matrices."""
    def value(x):
        return -d - float(np.sum(np.log(sym_eigen(x).eigenvalues)))

    return Generator(value, lambda x: -sym_inv(x),
                     domain=lambda x: sym_eigen(x).eigenvalues[-1] > 0.0,
                     name="log-det")


def det_root_scaler(d: int) -> Scaler:
    """Gauge ``det(X)^{1/d}`` on positive definite matrices."""
    def value(x):
        return float(np.exp(np.mean(np.log(sym_eigen(x).eigenvalues))))

    def grad(x):
        return (value(x) / d) * sym_inv(x)

    return Scaler(value, grad,
                  domain=lambda x: sym_eigen(x).eigenvalues[-1] > 0.0,
                  name="det-root")


# --- samplers -------------------------------------------------------------

def _sample_offset_box(rng, d, lo=0.3, hi=2.0):
    return rng.choice([-1.0, 1.0], size=d) * rng.uniform(lo, hi, size=d)


def _sample_ball(rng, d, r_lo, r_hi):
    v = rng.standard_normal(d)
    v /= math.sqrt(float(np.dot(v, v)))
    return v * rng.uniform(r_lo, r_hi)


def _sample_positive(rng, d, lo=0.2, hi=3.0):
    return rng.uniform(lo, hi, size=d)


def random_spd(rng, d, lam_lo=0.3, lam_hi=3.0) -> np.ndarray:
    """Random positive definite matrix with eigenvalues in [lam_lo, lam_hi]."""
    qmat, _ = np.linalg.qr(rng.standard_normal((d, d)))
    lam = rng.uniform(lam_lo, lam_hi, size=d)
    a = (qmat * lam) @ qmat.T
    return 0.5 * (a + a.T)


# --- closed forms ---------------------------------------------------------

def _cosine_closed_form(x, y):
    nx = math.sqrt(float(np.dot(x, x)))
    ny = math.sqrt(float(np.dot(y, y)))
    return nx - float(np.dot(x, y)) / ny


def _dual_norm_closed_form(q, W):
    def fn(x, y):
        ny = lq_norm(y, q)
        cross = float(np.sum(x * np.sign(y) * (np.abs(y) / ny) ** (q - 1.0)))
        return W * lq_norm(x, q) - W * cross
    return fn


def _sphere_closed_form(x, y):
    rx = math.sqrt(float(np.dot(x, x)))
    return manifolds.r_csc_r(rx) * manifolds.d_rec_sphere(x, y)


def _hyper_closed_form(x, y):
    rx = math.sqrt(float(np.dot(x, x)))
    return -manifolds.r_csch_r(rx) * manifolds.d_rec_hyper(x, y)


def _simplex_kl_closed_form(x, y):
    sx, sy = float(np.sum(x)), float(np.sum(y))
    return float(np.sum(x * np.log(x / y))) - sx * math.log(sx / sy)


def _geom_is_closed_form(x, y):
    d = len(x)
    gx = float(np.exp(np.mean(np.log(x))))
    gy = float(np.exp(np.mean(np.log(y))))
    return float(np.sum(x / y)) * gy - d * gx


def _von_neumann_closed_form(x, y):
    tx, ty = float(np.trace(x)), float(np.trace(y))
    cross = float(np.sum(x * (sym_log(x) - sym_log(y))))
    return cross - tx * math.log(tx / ty)


def _log_det_closed_form(x, y):
    d = x.shape[0]
    gx = float(np.exp(np.mean(np.log(sym_eigen(x).eigenvalues))))
    gy = float(np.exp(np.mean(np.log(sym_eigen(y).eigenvalues))))
    return gy * float(np.sum(x * sym_inv(y))) - d * gx


# --- entry construction ---------------------------------------------------

def catalog_entry(row: Row, d: int | None = None, q: float = 1.5,
                  W: float = 2.0) -> CatalogEntry:
    """Build the fully wired entry for one catalog row.

    ``d`` is the natural input dimension (tangent dimension for the manifold
    rows, matrix side for the matrix rows); ``q`` and ``W`` only affect the
    dual-norm row.  The manifold rows fix the lift constant to 1 so the
    scaled lifted points are exactly unit-norm.
    """
    if not isinstance(row, Row):
        raise ArgumentError(f"unknown catalog row: {row!r}")
    if row is Row.CosineRowI:
        d = 4 if d is None else d
        return CatalogEntry(
            id=row, gen=squared_euclidean_generator(offset=1.0),
            scaler=euclidean_norm_scaler(),
            closed_form=_cosine_closed_form,
            domain_desc="nonzero vectors in R^d",
            params={"d": d},
            sample=lambda rng: _sample_ball(rng, d, 0.2, 3.0),
        )
    if row is Row.DualNormRowII:
        d = 4 if d is None else d
        return CatalogEntry(
            id=row, gen=lq_generator(q, W), scaler=lq_gauge(q, W),
            closed_form=_dual_norm_closed_form(q, W),
            domain_desc="nonzero vectors in R^d",
            params={"d": d, "q": q, "W": W},
            sample=lambda rng: _sample_offset_box(rng, d),
        )
    if row is Row.SphereRowIII:
        d = 2 if d is None else d
        return CatalogEntry(
            id=row, gen=sphere_lift_generator(d), scaler=sphere_lift_scaler(d),
            closed_form=_sphere_closed_form,
            domain_desc="tangent points with |x| < pi",
            params={"d": d, "W": 1.0},
            sample=lambda rng: _sample_ball(rng, d, 0.05, 3.0),
            lift=manifolds.lift_sphere,
        )
    if row is Row.HyperRowIV:
        d = 2 if d is None else d
        return CatalogEntry(
            id=row, gen=hyper_lift_generator(d), scaler=hyper_lift_scaler(d),
            closed_form=_hyper_closed_form,
            domain_desc="tangent points in R^d",
            params={"d": d, "W": 1.0},
            sample=lambda rng: _sample_ball(rng, d, 0.05, 3.0),
            lift=manifolds.lift_hyper,
        )
    if row is Row.SimplexKLRowV:
        d = 3 if d is None else d
        return CatalogEntry(
            id=row, gen=kl_generator(), scaler=sum_scaler(d),
            closed_form=_simplex_kl_closed_form,
            domain_desc="strictly positive vectors",
            params={"d": d},
            sample=lambda rng: _sample_positive(rng, d),
        )
    if row is Row.GeomISRowVI:
        d = 3 if d is None else d
        return CatalogEntry(
            id=row, gen=itakura_saito_generator(d), scaler=geometric_mean_scaler(d),
            closed_form=_geom_is_closed_form,
            domain_desc="strictly positive vectors",
            params={"d": d},
            sample=lambda rng: _sample_positive(rng, d),
        )
    if row is Row.VonNeumannRowVII:
        d = 3 if d is None else d
        return CatalogEntry(
            id=row, gen=von_neumann_generator(), scaler=trace_scaler(),
            closed_form=_von_neumann_closed_form,
            domain_desc="symmetric positive definite matrices",
            params={"d": d},
            sample=lambda rng: random_spd(rng, d),
        )
    if row is Row.LogDetRowVIII:
        d = 3 if d is None else d
        return CatalogEntry(
            id=row, gen=log_det_generator(d), scaler=det_root_scaler(d),
            closed_form=_log_det_closed_form,
            domain_desc="symmetric positive definite matrices",
            params={"d": d},
            sample=lambda rng: random_spd(rng, d),
        )
    raise ArgumentError(f"unknown catalog row: {row!r}")


def closed_form_vs_generic(row: Row, trials: int, rng: np.random.Generator,
                           **kwargs) -> float:
    """Three-way agreement of the closed form against both identity sides.

    Samples valid pairs from the row's domain and returns the largest
    relative discrepancy among the closed form, the scaled left-hand side
    and the scaled-generator right-hand side.
    """
    if trials < 1:
        raise ArgumentError("trials must be at least 1")
    entry = catalog_entry(row, **kwargs)
    worst = 0.0
    for _ in range(trials):
        x = entry.sample(rng)
        y = entry.sample(rng)
        cf = entry.closed_form(x, y)
        chk = verify_scaled_identity(entry.gen, entry.scaler,
                                     entry.lift(x), entry.lift(y))
        scale = max(1.0, abs(cf), abs(chk.lhs), abs(chk.rhs))
        worst = max(worst,
                    abs(cf - chk.lhs) / scale,
                    abs(cf - chk.rhs) / scale,
                    abs(chk.lhs - chk.rhs) / scale)
    return worst
