"""p-LMS and dual-norm p-LMS online learners.

The classic p-LMS learner mirrors the squared-error gradient through the
generator ``(1/2)|w|_q^2`` and leaves ``|w_t|`` uncontrolled.  Scaling that
generator by the ball gauge ``|w|_q / W`` gives ``W |w|_q``, whose gradient
maps *any* nonzero vector onto the radius-W sphere of the dual norm.
Chaining the two scaled gradients therefore keeps every iterate exactly on
the L_q ball of radius W with no projection step, at the cost of one extra
norm evaluation per update.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ArgumentError, DomainError, OutOfRegimeError
from .rng import stream

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LqConfig:
    """Dual exponent pair and ball radius.

    ``p`` and ``q`` must satisfy ``1/p + 1/q = 1``; the regret guarantee
    additionally needs ``p > 2``, which is checked only where claimed.
    """

    p: float
    q: float
    W: float

    def __post_init__(self):
        if self.p <= 1.0 or self.q <= 1.0:
            raise ArgumentError("exponents must exceed 1")
        if abs(1.0 / self.p + 1.0 / self.q - 1.0) > 1e-12:
            raise ArgumentError("exponents are not dual: 1/p + 1/q != 1")
        if self.W <= 0.0:
            raise ArgumentError("ball radius W must be positive")

    @classmethod
    def from_p(cls, p: float, W: float = 1.0) -> "LqConfig":
        return cls(p=p, q=p / (p - 1.0), W=W)


@dataclass(frozen=True)
class OnlineState:
    """Current weights and step counter of an online learner."""

    w: np.ndarray
    t: int = 0

    @classmethod
    def initial(cls, d: int) -> "OnlineState":
        return cls(w=np.zeros(d), t=0)


def lq_norm(w: np.ndarray, q: float) -> float:
    w = np.abs(np.asarray(w, dtype=float))
    m = w.max() if w.size else 0.0
    if m == 0.0:
        return 0.0
    return float(m * np.sum((w / m) ** q) ** (1.0 / q))


def grad_phi_q(w: np.ndarray, q: float) -> np.ndarray:
    """Gradient of ``(1/2)|w|_q^2``: ``|w|_q^{2-q} sign(w) |w|^{q-1}``.

    The origin maps to the origin by convention.
    """
    w = np.asarray(w, dtype=float)
    n = lq_norm(w, q)
    if n == 0.0:
        return np.zeros_like(w)
    return n ** (2.0 - q) * np.sign(w) * np.abs(w) ** (q - 1.0)


def grad_phi_dagger_q(w: np.ndarray, q: float, W: float) -> np.ndarray:
    """Gradient of ``W |w|_q``: ``W |w|_q^{1-q} sign(w) |w|^{q-1}``.

    Its p-norm is exactly W for any nonzero ``w``; the origin maps to the
    origin by convention.
    """
    w = np.asarray(w, dtype=float)
    n = lq_norm(w, q)
    if n == 0.0:
        return np.zeros_like(w)
    return W * np.sign(w) * (np.abs(w) / n) ** (q - 1.0)


def loss_gradient(w: np.ndarray, x: np.ndarray, y: float) -> np.ndarray:
    """Gradient of the squared prediction error ``(1/2)(y - w.x)^2``."""
    return (float(np.dot(w, x)) - y) * x


def plms_step(state: OnlineState, x: np.ndarray, y: float, eta: float,
              cfg: LqConfig) -> OnlineState:
    """Mirror step through ``(1/2)|w|_q^2``; the inverse map is the dual
    exponent gradient."""
    if eta <= 0.0:
        raise ArgumentError("learning rate must be positive")
    theta = grad_phi_q(state.w, cfg.q) - eta * loss_gradient(state.w, x, y)
    return OnlineState(w=grad_phi_q(theta, cfg.p), t=state.t + 1)


def dnplms_step(state: OnlineState, x: np.ndarray, y: float, eta: float,
                cfg: LqConfig) -> OnlineState:
    """Dual-norm mirror step through the scaled generators.

    Every iterate after the first lands exactly on the L_q sphere of radius
    W.  Exact cancellation of the mirrored point keeps the previous weights
    and logs a warning.
    """
    if eta <= 0.0:
        raise ArgumentError("learning rate must be positive")
    theta = grad_phi_dagger_q(state.w, cfg.q, cfg.W) - eta * loss_gradient(state.w, x, y)
    if not np.any(theta):
        logger.warning("dual-norm step cancelled exactly at t=%d; keeping weights",
                       state.t + 1)
        return OnlineState(w=state.w.copy(), t=state.t + 1)
    return OnlineState(w=grad_phi_dagger_q(theta, cfg.p, cfg.W), t=state.t + 1)


def adaptive_eta(residual: float, cfg: LqConfig, x_bound: float,
                 gamma: float = 1.0) -> float:
    """Adaptive learning rate driven by the last absolute residual.

    ``gamma`` may be any value in [1/2, 1]; the denominator mixes the worst
    case constant with the observed residual so the mirrored offset always
    stays inside the ball.
    """
    if not 0.5 <= gamma <= 1.0:
        raise ArgumentError("gamma must lie in [1/2, 1]")
    if x_bound <= 0.0:
        raise ArgumentError("x_bound must be positive")
    m = max(cfg.W, x_bound)
    denom = 4.0 * (cfg.p - 1.0) * m * x_bound * cfg.W + abs(residual) * x_bound
    return gamma * cfg.W / denom


def baseline_eta(cfg: LqConfig, x_bound: float) -> float:
    """Constant baseline rate ``1 / ((p-1) X_p^2)`` used by plain p-LMS."""
    return 1.0 / ((cfg.p - 1.0) * x_bound ** 2)


def regret_bound(cfg: LqConfig, x_bound: float, y_bound: float) -> float:
    """Worst-case bound on the q-normalised regret of the dual-norm learner.

    Only claimed for ``p > 2``; learners may still run at smaller p, but the
    bound itself is gated.
    """
    if cfg.p <= 2.0:
        raise OutOfRegimeError("regret bound requires p > 2")
    p, W = cfg.p, cfg.W
    m = max(W, x_bound)
    return (4.0 * (p - 1.0) * x_bound**2 * W**2
            + (16.0 * p - 8.0) * m * x_bound**2 * W
            + 8.0 * y_bound * x_bound**2)


@dataclass
class StepLog:
    """Per-step record of one online run."""

    x: np.ndarray          # (T, d) inputs
    y: np.ndarray          # (T,) targets
    pred: np.ndarray       # (T,) predictions w_{t-1}.x_t
    norm_q: np.ndarray     # (T,) |w_t|_q after the update

    @property
    def horizon(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class RegretLedger:
    """Sums defining the q-normalised regret against a fixed comparator."""

    sum_comparator_gap: float    # sum ((u.x)/g_q(u) - pred)^2
    sum_target_gap: float        # sum ((u.x)/g_q(u) - y)^2
    sum_comparator_gap_raw: float  # unnormalised comparator variants
    sum_target_gap_raw: float

    @property
    def regret_q(self) -> float:
        return self.sum_comparator_gap - self.sum_target_gap

    @property
    def regret_raw(self) -> float:
        return self.sum_comparator_gap_raw - self.sum_target_gap_raw

    @classmethod
    def from_log(cls, log: StepLog, u: np.ndarray, cfg: LqConfig) -> "RegretLedger":
        u = np.asarray(u, dtype=float)
        nq = lq_norm(u, cfg.q)
        if nq == 0.0:
            raise DomainError("comparator must be nonzero")
        proj = log.x @ u
        scaled = proj * (cfg.W / nq)
        return cls(
            sum_comparator_gap=float(np.sum((scaled - log.pred) ** 2)),
            sum_target_gap=float(np.sum((scaled - log.y) ** 2)),
            sum_comparator_gap_raw=float(np.sum((proj - log.pred) ** 2)),
            sum_target_gap_raw=float(np.sum((proj - log.y) ** 2)),
        )


def regret_q(log: StepLog, u: np.ndarray, cfg: LqConfig) -> float:
    """q-normalised regret of a completed run against comparator ``u``."""
    return RegretLedger.from_log(log, u, cfg).regret_q


@dataclass(frozen=True)
class StreamSpec:
    """Synthetic adaptive-filtering stream.

    Inputs are drawn uniformly on the L_p sphere of radius ``x_bound``; the
    target vector is redrawn every ``switch_period`` steps; both learners
    see the misestimated bound ``rho * x_bound`` in their rates.
    """

    d: int = 20
    target_kind: str = "dense"      # dense | sparse
    noise_std: float = 0.1
    horizon: int = 50_000
    switch_period: int = 1000
    x_bound: float = 1.0
    rho: float = 1.0
    gamma: float = 1.0
    y_clip: float | None = None     # optional hard bound on |y_t|

    def __post_init__(self):
        if self.horizon < 1:
            raise ArgumentError("horizon must be at least 1")
        if self.target_kind not in ("dense", "sparse"):
            raise ArgumentError(f"unknown target kind {self.target_kind!r}")
        if not 0.5 <= self.gamma <= 1.0:
            raise ArgumentError("gamma must lie in [1/2, 1]")


def _unit_lp_sphere(rng: np.random.Generator, n: int, d: int, p: float) -> np.ndarray:
    """Points uniform (cone measure) on the unit L_p sphere."""
    mags = rng.gamma(1.0 / p, 1.0, size=(n, d)) ** (1.0 / p)
    signs = rng.choice([-1.0, 1.0], size=(n, d))
    x = signs * mags
    norms = np.sum(np.abs(x) ** p, axis=1) ** (1.0 / p)
    return x / norms[:, None]


def _draw_target(rng: np.random.Generator, spec: StreamSpec) -> np.ndarray:
    u = rng.standard_normal(spec.d)
    if spec.target_kind == "sparse":
        keep = rng.choice(spec.d, size=max(1, int(np.ceil(0.1 * spec.d))), replace=False)
        mask = np.zeros(spec.d)
        mask[keep] = 1.0
        u = u * mask
    return u


def simulate_stream(spec: StreamSpec, p: float, rng: np.random.Generator,
                    target_norm: float | None = None):
    """Materialise the stream for one cell.

    Returns ``(x, y, targets)`` with ``x`` of shape (T, d) scaled so that
    ``|x_t|_p`` equals ``x_bound`` exactly, targets redrawn every
    ``switch_period`` steps, and ``y_t = u_t . x_t + noise`` (optionally
    clipped to ``y_clip``).  ``target_norm`` rescales each target to a fixed
    q-norm, which keeps ``|u . x|`` under control for bound checks.
    """
    t_total = spec.horizon
    x = spec.x_bound * _unit_lp_sphere(rng, t_total, spec.d, p)
    q = p / (p - 1.0)
    targets = np.empty((t_total, spec.d))
    pos = 0
    while pos < t_total:
        u = _draw_target(rng, spec)
        if target_norm is not None:
            u = u * (target_norm / lq_norm(u, q))
        targets[pos:pos + spec.switch_period] = u
        pos += spec.switch_period
    y = np.sum(targets * x, axis=1) + spec.noise_std * rng.standard_normal(t_total)
    if spec.y_clip is not None:
        y = np.clip(y, -spec.y_clip, spec.y_clip)
    return x, y, targets


def run_online(x: np.ndarray, y: np.ndarray, cfg: LqConfig, kind: str,
               x_bound_est: float, gamma: float = 1.0) -> StepLog:
    """Run one learner over a materialised stream and log every step.

    ``kind`` selects ``"plms"`` (constant baseline rate) or ``"dnplms"``
    (adaptive rate); both rates use the possibly misestimated bound
    ``x_bound_est``.  Produces exactly the same iterates as repeated
    ``plms_step`` / ``dnplms_step`` calls; the mirror image of the current
    weights is cached between steps instead of being recomputed.
    """
    if kind not in ("plms", "dnplms"):
        raise ArgumentError(f"unknown learner kind {kind!r}")
    dual = kind == "dnplms"
    t_total = len(y)
    p, q, big_w = cfg.p, cfg.q, cfg.W
    w = np.zeros(x.shape[1])
    mirror = w
    pred = np.empty(t_total)
    norm_q = np.empty(t_total)
    eta0 = baseline_eta(cfg, x_bound_est)
    m_denom = 4.0 * (p - 1.0) * max(big_w, x_bound_est) * x_bound_est * big_w
    for t in range(t_total):
        xt = x[t]
        yt = float(y[t])
        pr = float(np.dot(w, xt))
        pred[t] = pr
        if dual:
            eta = gamma * big_w / (m_denom + abs(yt - pr) * x_bound_est)
        else:
            eta = eta0
        theta = mirror - (eta * (pr - yt)) * xt
        if dual and not np.any(theta):
            logger.warning("dual-norm step cancelled exactly at t=%d; keeping weights",
                           t + 1)
        elif dual:
            w = grad_phi_dagger_q(theta, p, big_w)
            mirror = grad_phi_dagger_q(w, q, big_w)
        else:
            w = grad_phi_q(theta, p)
            mirror = grad_phi_q(w, q)
        norm_q[t] = lq_norm(w, q)
    return StepLog(x=x, y=y, pred=pred, norm_q=norm_q)


def _trailing_mean(values: np.ndarray, window: int = 100) -> np.ndarray:
    c = np.concatenate([[0.0], np.cumsum(values)])
    t = np.arange(1, len(values) + 1)
    lo = np.maximum(0, t - window)
    return (c[t] - c[lo]) / (t - lo)


@dataclass(frozen=True)
class H2Cell:
    """One experiment cell: a (p, rho, target kind) combination."""

    cfg: LqConfig
    rho: float
    target_kind: str
    table: np.ndarray   # columns: t, err_plms, err_dnplms, diff, norm_plms_q, norm_dn_q

    HEADER = ("t", "err_plms", "err_dnplms", "diff", "norm_plms_q", "norm_dn_q")

    def filename(self) -> str:
        kind = self.target_kind
        return f"dnplms_p{self.cfg.p:g}_q{self.cfg.q:g}_rho{self.rho:g}_{kind}.csv"


def run_h2_experiment(spec: StreamSpec, cfgs: Sequence[LqConfig],
                      rhos: Sequence[float], seed: int,
                      smoothing_window: int = 100) -> list[H2Cell]:
    """Run the p-LMS vs dual-norm comparison over all requested cells.

    Error columns are squared prediction errors smoothed with a trailing
    window; raw errors stay in memory for regret computation.  Each cell
    draws its own derived random stream, so cells are order-independent.
    """
    cells = []
    for i, cfg in enumerate(cfgs):
        for j, rho in enumerate(rhos):
            rng = stream(seed, i, j)
            cell_spec = replace(spec, rho=rho)
            x, y, _ = simulate_stream(cell_spec, cfg.p, rng)
            est = rho * cell_spec.x_bound
            log_p = run_online(x, y, cfg, "plms", est, cell_spec.gamma)
            log_d = run_online(x, y, cfg, "dnplms", est, cell_spec.gamma)
            err_p = _trailing_mean((y - log_p.pred) ** 2, smoothing_window)
            err_d = _trailing_mean((y - log_d.pred) ** 2, smoothing_window)
            table = np.column_stack([
                np.arange(1, len(y) + 1, dtype=float),
                err_p, err_d, err_p - err_d, log_p.norm_q, log_d.norm_q,
            ])
            cells.append(H2Cell(cfg=cfg, rho=rho, target_kind=spec.target_kind,
                                table=table))
    return cells


def write_cell_csv(cell: H2Cell, out_dir: str | Path) -> Path:
    """Write one cell table in the experiment CSV layout."""
    path = Path(out_dir) / cell.filename()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(H2Cell.HEADER)
        for row in cell.table:
            writer.writerow([f"{int(row[0])}"] + [f"{v:.17g}" for v in row[1:]])
    return path
