"""Multiclass density-ratio estimation by class-probability estimation.

With a reference class C, the vector of class-conditional density ratios
``r`` and the prior-normalised posteriors ``eta`` are linked by the affine
gauge ``g(z) = pi_C / (1 - pi_C) + tilde_pi^T z``: the normalised ratio
``r / g(r)`` *is* ``eta``, and the mixture density factors as
``M(x) = (1 - pi_C) g(r(x)) P_C(x)``.  Scaling any convex generator by this
gauge therefore converts the expected posterior divergence of an estimator
into an expected scaled distortion between density ratios, which is the
reduction this module implements and verifies.

The posterior vector ``eta`` is defined per class ``c < C`` as
``Pr(Y=c|X=x) / tilde_pi_c``; we extend the same formula to the C-th
coordinate (``tilde_pi_C := pi_C / (1 - pi_C)``) so that dividing by
``eta_C`` reproduces the exact ratio vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .catalog import kl_generator
from .core import Generator, Scaler, scaled_generator
from .errors import ArgumentError, DomainError, FitError
from .rng import stream


@dataclass(frozen=True)
class MixtureSpec:
    """Gaussian class-conditional mixture with known priors.

    The reference class is the last one.  Class-conditionals are isotropic
    Gaussians ``N(mu_c, sigma_c^2 I)``.
    """

    priors: np.ndarray     # (C,) simplex
    means: np.ndarray      # (C, d)
    stds: np.ndarray       # (C,)

    def __post_init__(self):
        p = np.asarray(self.priors, dtype=float)
        if p.ndim != 1 or len(p) < 2:
            raise ArgumentError("need at least two classes")
        if abs(float(np.sum(p)) - 1.0) > 1e-12 or np.any(p <= 0.0):
            raise ArgumentError("priors must be strictly positive and sum to 1")
        if np.any(np.asarray(self.stds) <= 0.0):
            raise ArgumentError("stds must be positive")
        if np.asarray(self.means).shape[0] != len(p):
            raise ArgumentError("means/priors class count mismatch")

    @property
    def n_classes(self) -> int:
        return len(self.priors)

    @property
    def dim(self) -> int:
        return np.asarray(self.means).shape[1]


@dataclass(frozen=True)
class LabeledDataset:
    """Feature rows with class labels in ``0 .. C-1`` (reference last)."""

    x: np.ndarray
    y: np.ndarray

    def __len__(self) -> int:
        return len(self.y)


class TildePrior(NamedTuple):
    """Priors renormalised over the non-reference classes."""

    tilde: np.ndarray   # (C-1,)
    pi_ref: float

    @classmethod
    def from_priors(cls, priors: np.ndarray) -> "TildePrior":
        priors = np.asarray(priors, dtype=float)
        pi_ref = float(priors[-1])
        if not 0.0 < pi_ref < 1.0:
            raise DomainError("reference prior must lie strictly inside (0, 1)")
        return cls(tilde=priors[:-1] / (1.0 - pi_ref), pi_ref=pi_ref)


def sample_dataset(spec: MixtureSpec, n: int, rng: np.random.Generator) -> LabeledDataset:
    """Draw ``n`` labelled points: labels from the prior, features from the
    class Gaussian."""
    if n < spec.n_classes:
        raise ArgumentError(f"need at least {spec.n_classes} samples")
    y = rng.choice(spec.n_classes, size=n, p=spec.priors)
    x = np.asarray(spec.means)[y] + np.asarray(spec.stds)[y][:, None] * \
        rng.standard_normal((n, spec.dim))
    return LabeledDataset(x=x, y=y)


def _log_densities(spec: MixtureSpec, x: np.ndarray) -> np.ndarray:
    """Log class-conditional densities, shape (n, C)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    mu = np.asarray(spec.means)
    sig = np.asarray(spec.stds)
    d = spec.dim
    sq = np.sum((x[:, None, :] - mu[None, :, :]) ** 2, axis=2)
    return (-0.5 * sq / sig**2 - d * np.log(sig)
            - 0.5 * d * math.log(2.0 * math.pi))


def true_posterior(spec: MixtureSpec, x: np.ndarray) -> np.ndarray:
    """Exact posterior ``Pr(Y | X=x)``, log-sum-exp stabilised.

    Accepts a single point or a batch; the output matches (``(C,)`` or
    ``(n, C)``).
    """
    single = np.asarray(x).ndim == 1
    logp = _log_densities(spec, x) + np.log(spec.priors)[None, :]
    logp -= logp.max(axis=1, keepdims=True)
    p = np.exp(logp)
    p /= p.sum(axis=1, keepdims=True)
    return p[0] if single else p


def density_ratio_true(spec: MixtureSpec, x: np.ndarray) -> np.ndarray:
    """Analytic ratio of each class-conditional to the reference class."""
    logp = _log_densities(spec, x)
    out = np.exp(logp[:, :-1] - logp[:, -1:])
    return out[0] if np.asarray(x).ndim == 1 else out


def eta_from_posterior(posterior: np.ndarray, priors: np.ndarray) -> np.ndarray:
    """Prior-normalised posterior vector, reference coordinate included.

    ``eta_c = p_c (1 - pi_C) / pi_c`` for every class, which extends the
    non-reference definition to ``c = C`` with ``tilde_pi_C = pi_C/(1-pi_C)``.
    """
    priors = np.asarray(priors, dtype=float)
    if np.any(priors <= 0.0):
        raise DomainError("all priors must be positive")
    tp = TildePrior.from_priors(priors)
    return np.asarray(posterior, dtype=float) * (1.0 - tp.pi_ref) / priors


def density_ratio_estimate(eta_hat: np.ndarray) -> np.ndarray:
    """Ratio estimate ``eta_hat_c / eta_hat_C`` over the non-reference
    classes."""
    eta_hat = np.asarray(eta_hat, dtype=float)
    ref = eta_hat[..., -1]
    if np.any(ref <= 0.0):
        raise DomainError("reference coordinate of the estimate must be positive")
    return eta_hat[..., :-1] / eta_hat[..., -1:]


def dre_scaler(priors: np.ndarray) -> Scaler:
    """Affine gauge ``pi_C/(1-pi_C) + tilde_pi^T z`` on ratio vectors."""
    tp = TildePrior.from_priors(np.asarray(priors, dtype=float))
    bias = tp.pi_ref / (1.0 - tp.pi_ref)
    tilde = tp.tilde.copy()
    return Scaler(lambda z: bias + float(np.dot(tilde, z)),
                  lambda z: tilde.copy(),
                  name="dre-gauge", is_affine=True)


@dataclass
class SoftmaxModel:
    """Multinomial logistic model; last weight column is the bias."""

    weights: np.ndarray   # (C, d+1)

    def posterior(self, x: np.ndarray) -> np.ndarray:
        single = np.asarray(x).ndim == 1
        x = np.atleast_2d(np.asarray(x, dtype=float))
        z = x @ self.weights[:, :-1].T + self.weights[:, -1]
        z -= z.max(axis=1, keepdims=True)
        p = np.exp(z)
        p /= p.sum(axis=1, keepdims=True)
        return p[0] if single else p


def _cross_entropy(weights, x1, onehot):
    z = x1 @ weights.T
    z -= z.max(axis=1, keepdims=True)
    logz = z - np.log(np.sum(np.exp(z), axis=1, keepdims=True))
    return -float(np.mean(np.sum(onehot * logz, axis=1)))


def fit_softmax(data: LabeledDataset, epochs: int = 200, step: float = 1.0) -> SoftmaxModel:
    """Full-batch gradient descent on mean cross-entropy with backtracking.

    The training loss never increases: a step that would increase it is
    halved until it does not.
    """
    if epochs < 1:
        raise ArgumentError("epochs must be at least 1")
    if step <= 0.0:
        raise ArgumentError("step must be positive")
    classes = np.unique(data.y)
    if len(classes) < 2:
        raise FitError("need samples from at least two classes")
    n, d = data.x.shape
    n_classes = int(np.max(data.y)) + 1
    x1 = np.concatenate([data.x, np.ones((n, 1))], axis=1)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), data.y] = 1.0

    w = np.zeros((n_classes, d + 1))
    loss = _cross_entropy(w, x1, onehot)
    for _ in range(epochs):
        z = x1 @ w.T
        z -= z.max(axis=1, keepdims=True)
        p = np.exp(z)
        p /= p.sum(axis=1, keepdims=True)
        grad = (p - onehot).T @ x1 / n
        while True:
            cand = w - step * grad
            cand_loss = _cross_entropy(cand, x1, onehot)
            if cand_loss <= loss + 1e-12 or step < 1e-12:
                break
            step *= 0.5
        if cand_loss <= loss + 1e-12:
            w, loss = cand, cand_loss
    return SoftmaxModel(weights=w)


class Lemma1Result(NamedTuple):
    lhs: float
    rhs: float
    absdiff: float
    paired_se: float


def _kl_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise divergence of the ``sum x log x - x`` generator."""
    return np.sum(a * np.log(a / b) - a + b, axis=1)


def _kl_scaled_rows(r: np.ndarray, r_hat: np.ndarray, tilde: np.ndarray,
                    bias: float) -> np.ndarray:
    """Row-wise scaled-KL distortion under the ratio gauge."""
    g = bias + r @ tilde
    g_hat = bias + r_hat @ tilde
    v = r / g[:, None]
    v_hat = r_hat / g_hat[:, None]
    phi_v = np.sum(v * np.log(v) - v, axis=1)
    phi_v_hat = np.sum(v_hat * np.log(v_hat) - v_hat, axis=1)
    grad_v_hat = np.log(v_hat)
    slack = phi_v_hat - np.sum(v_hat * grad_v_hat, axis=1)
    grad_dag = grad_v_hat + slack[:, None] * tilde[None, :]
    return g * phi_v - g_hat * phi_v_hat - np.sum((r - r_hat) * grad_dag, axis=1)


def perturbed_posterior(spec: MixtureSpec, scale: float, rng: np.random.Generator,
                        jitter_stds: bool = False) -> Callable[[np.ndarray], np.ndarray]:
    """Posterior of a jittered copy of ``spec``; a plug-in imperfect estimator.

    Means are always jittered; spreads only on request, since mismatched
    spreads make the tail ratios of the two models explode.
    """
    stds = np.asarray(spec.stds)
    if jitter_stds:
        stds = stds * np.exp(scale * rng.standard_normal(len(stds)))
    bumped = MixtureSpec(
        priors=spec.priors,
        means=np.asarray(spec.means) + scale * rng.standard_normal(np.asarray(spec.means).shape),
        stds=stds,
    )
    return lambda x: true_posterior(bumped, x)


def _sample_reference(spec: MixtureSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    mu = np.asarray(spec.means)[-1]
    sig = float(np.asarray(spec.stds)[-1])
    return mu + sig * rng.standard_normal((n, spec.dim))


def reduction_gap(spec: MixtureSpec, posterior_hat: Callable[[np.ndarray], np.ndarray],
                  phi: Generator | None, n_mc: int,
                  rng: np.random.Generator) -> Lemma1Result:
    """Paired Monte-Carlo check of the posterior-to-ratio reduction.

    Both sides are estimated from one common sample of the reference class:
    the left side (mixture expectation of the posterior divergence) uses the
    change-of-measure weight ``(1 - pi_C) g(r(x))``, the right side is the
    scaled-distortion expectation.  The paired standard error of the
    difference is reported alongside.

    ``phi=None`` selects the KL generator on a fast vectorised path; any
    other convex generator on the positive orthant runs through the generic
    object machinery.
    """
    if n_mc < 1000:
        raise ArgumentError("need at least 1000 Monte-Carlo samples")
    x = _sample_reference(spec, n_mc, rng)

    priors = np.asarray(spec.priors)
    pi_ref = float(priors[-1])
    tp = TildePrior.from_priors(priors)
    bias = pi_ref / (1.0 - pi_ref)

    eta = eta_from_posterior(true_posterior(spec, x), priors)
    eta_hat = eta_from_posterior(posterior_hat(x), priors)
    r = density_ratio_estimate(eta)
    r_hat = density_ratio_estimate(eta_hat)
    weight = bias + r @ tp.tilde

    if phi is None:
        a = (1.0 - pi_ref) * weight * _kl_rows(eta[:, :-1], eta_hat[:, :-1])
        b = (1.0 - pi_ref) * _kl_scaled_rows(r, r_hat, tp.tilde, bias)
    else:
        gauge = dre_scaler(priors)
        phi_dag = scaled_generator(phi, gauge)
        a = np.empty(n_mc)
        b = np.empty(n_mc)
        for i in range(n_mc):
            d_phi = (phi(eta[i, :-1]) - phi(eta_hat[i, :-1])
                     - float(np.dot(eta[i, :-1] - eta_hat[i, :-1],
                                    phi.grad(eta_hat[i, :-1]))))
            d_dag = (phi_dag(r[i]) - phi_dag(r_hat[i])
                     - float(np.dot(r[i] - r_hat[i], phi_dag.grad(r_hat[i]))))
            a[i] = (1.0 - pi_ref) * weight[i] * d_phi
            b[i] = (1.0 - pi_ref) * d_dag
    lhs = float(np.mean(a))
    rhs = float(np.mean(b))
    se = float(np.std(a - b, ddof=1) / math.sqrt(n_mc))
    return Lemma1Result(lhs=lhs, rhs=rhs, absdiff=abs(lhs - rhs), paired_se=se)


def lemma1_check(spec: MixtureSpec, posterior_hat, phi: Generator, n_mc: int,
                 rng: np.random.Generator) -> Lemma1Result:
    """Alias for :func:`reduction_gap` (the identity it verifies)."""
    return reduction_gap(spec, posterior_hat, phi, n_mc, rng)


def draw_random_spec(n_classes: int, dim: int, rng: np.random.Generator) -> MixtureSpec:
    """Random mixture: near-uniform priors, tight means, moderate spreads.

    The prior draw takes ``(1/C) 1 + (1 - 1/C) U[0,1]^C`` and renormalises
    it onto the simplex.
    """
    raw = (1.0 / n_classes) + (1.0 - 1.0 / n_classes) * rng.uniform(size=n_classes)
    return MixtureSpec(
        priors=raw / float(np.sum(raw)),
        means=0.1 * rng.standard_normal((n_classes, dim)),
        stds=rng.uniform(0.5, 1.0, size=n_classes),
    )


@dataclass(frozen=True)
class H1Config:
    """Configuration of the sample-size sweep."""

    sizes: tuple = (256, 1024)
    trials: int = 2
    seed: int = 0
    n_classes: int = 3
    dim: int = 2
    epochs: int = 300
    train_fraction: float = 0.8


def run_h1_experiment(config: H1Config) -> list[tuple[int, int, float]]:
    """Sweep sample sizes and trials; report the scaled-distortion test error.

    Per trial: draw a random spec, draw a dataset of the given size, split
    train/test, fit a softmax posterior on train, and estimate the expected
    scaled distortion between true and estimated density ratios over the
    reference-class portion of the test split.

    Returns ``(size, trial, divergence)`` rows.
    """
    phi = kl_generator()
    rows = []
    for si, size in enumerate(config.sizes):
        for trial in range(config.trials):
            for attempt in range(20):
                rng = stream(config.seed, si, trial, attempt)
                spec = draw_random_spec(config.n_classes, config.dim, rng)
                data = sample_dataset(spec, size, rng)
                n_tr = int(config.train_fraction * size)
                train = LabeledDataset(x=data.x[:n_tr], y=data.y[:n_tr])
                test = LabeledDataset(x=data.x[n_tr:], y=data.y[n_tr:])
                ref_mask = test.y == spec.n_classes - 1
                if len(np.unique(train.y)) == spec.n_classes and np.any(ref_mask):
                    break
            else:
                raise FitError("could not draw a usable trial")
            model = fit_softmax(train, epochs=config.epochs)
            rows.append((size, trial,
                         _test_divergence(spec, model, test.x[ref_mask])))
    return rows


def _test_divergence(spec: MixtureSpec, model: SoftmaxModel, x_ref: np.ndarray) -> float:
    """Reference-class average of the scaled distortion, with the prior factor."""
    priors = np.asarray(spec.priors)
    pi_ref = float(priors[-1])
    tp = TildePrior.from_priors(priors)
    eta = eta_from_posterior(true_posterior(spec, x_ref), priors)
    eta_hat = eta_from_posterior(model.posterior(x_ref), priors)
    r = density_ratio_estimate(eta)
    r_hat = density_ratio_estimate(eta_hat)
    vals = _kl_scaled_rows(r, r_hat, tp.tilde, pi_ref / (1.0 - pi_ref))
    return (1.0 - pi_ref) * float(np.mean(vals))


H1_HEADER = ("N", "trial", "divergence")
