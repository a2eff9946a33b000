"""Seeding and clustering on constant-curvature manifolds.

Data live in the tangent plane at the pole.  Embedding through the
exponential map turns the reconstruction loss into (half) a squared chordal
distance between embedded points, so the classic squared-distance seeding
rule applies verbatim to the embedded coordinates: each new center is drawn
with probability proportional to the current minimum reconstruction loss.
The chosen centers are mapped back to the tangent plane with the log map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence
import csv
import logging
from pathlib import Path

import numpy as np

from . import manifolds
from .errors import ArgumentError
from .rng import stream

logger = logging.getLogger(__name__)


class Manifold:
    """Dispatch table for one constant-curvature manifold."""

    def __init__(self, name: str):
        if name not in ("sphere", "hyperboloid"):
            raise ArgumentError(f"unknown manifold {name!r}")
        self.name = name

    def embed(self, x: np.ndarray) -> np.ndarray:
        return manifolds.exp_sphere(x) if self.name == "sphere" else manifolds.exp_hyper(x)

    def log(self, p: np.ndarray) -> np.ndarray:
        return manifolds.log_sphere(p) if self.name == "sphere" else manifolds.log_hyper(p)

    def d_rec_embedded(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Reconstruction loss between embedded points (batched)."""
        if self.name == "sphere":
            return 1.0 - np.sum(p * q, axis=-1)
        return -manifolds.minkowski_dot(p, q) - 1.0

    def mean_center(self, points: np.ndarray) -> np.ndarray | None:
        """Loss-optimal center of a set of embedded points.

        The mean renormalised back to the manifold; ``None`` for the sphere's
        degenerate zero-mean case.
        """
        m = np.mean(points, axis=0)
        if self.name == "sphere":
            n = float(np.linalg.norm(m))
            if n < 1e-12:
                return None
            return m / n
        nm = -float(manifolds.minkowski_dot(m, m))
        return m / np.sqrt(nm)


SPHERE = Manifold("sphere")
HYPERBOLOID = Manifold("hyperboloid")


def _as_manifold(manifold) -> Manifold:
    return manifold if isinstance(manifold, Manifold) else Manifold(manifold)


@dataclass(frozen=True)
class SeedingResult:
    """Output of one seeding run: tangent-plane centers and their potential."""

    centers: np.ndarray        # (k, d) tangent points
    chosen: np.ndarray         # (k,) indices into the input
    potential: float


def potential(points: np.ndarray, centers: np.ndarray, manifold) -> float:
    """Total reconstruction loss of tangent points against tangent centers."""
    man = _as_manifold(manifold)
    p = man.embed(np.asarray(points, dtype=float))
    c = man.embed(np.asarray(centers, dtype=float))
    d = np.stack([man.d_rec_embedded(p, ci) for ci in c])
    return float(np.sum(np.min(d, axis=0)))


def kmeanspp_seed(points: np.ndarray, k: int, manifold,
                  rng: np.random.Generator) -> SeedingResult:
    """Squared-distance seeding on the embedded coordinates.

    The first center is uniform over the data; each further center is drawn
    with probability proportional to the current minimum reconstruction
    loss.  If every remaining loss is zero the rest are drawn uniformly from
    the unchosen points.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if not 1 <= k <= n:
        raise ArgumentError(f"need 1 <= k <= {n}")
    man = _as_manifold(manifold)
    embedded = man.embed(points)

    chosen = [int(rng.integers(n))]
    mind = np.maximum(man.d_rec_embedded(embedded, embedded[chosen[0]]), 0.0)
    mind[chosen[0]] = 0.0
    while len(chosen) < k:
        total = float(np.sum(mind))
        if total <= 0.0:
            remaining = np.setdiff1d(np.arange(n), chosen)
            idx = int(rng.choice(remaining))
        else:
            idx = int(rng.choice(n, p=mind / total))
        chosen.append(idx)
        mind = np.minimum(mind, np.maximum(
            man.d_rec_embedded(embedded, embedded[idx]), 0.0))
        mind[idx] = 0.0

    return SeedingResult(centers=man.log(embedded[chosen]),
                         chosen=np.asarray(chosen),
                         potential=float(np.sum(mind)))


def _partitions(n: int, kmax: int):
    """Restricted-growth strings: all partitions of n items into <= kmax blocks."""
    labels = np.zeros(n, dtype=int)

    def rec(i: int, used: int):
        if i == n:
            yield labels.copy()
            return
        for lab in range(min(used + 1, kmax)):
            labels[i] = lab
            yield from rec(i + 1, max(used, lab + 1))

    yield from rec(1, 1)


def brute_force_opt(points: np.ndarray, k: int, manifold):
    """Exact optimum of the reconstruction-loss clustering objective.

    Enumerates every partition into at most ``k`` nonempty clusters and
    takes the loss-optimal center of each cluster (the renormalised mean,
    which minimises the loss exactly on both manifolds).  Degenerate sphere
    clusters whose embedded mean vanishes are skipped with a warning.

    Limited to ``n <= 12`` and ``k <= 3``.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if n > 12 or k > 3:
        raise ArgumentError("brute force limited to n <= 12, k <= 3")
    if not 1 <= k <= n:
        raise ArgumentError(f"need 1 <= k <= {n}")
    man = _as_manifold(manifold)
    embedded = man.embed(points)

    best = None
    best_labels = None
    for labels in _partitions(n, k):
        tot = 0.0
        ok = True
        for lab in range(labels.max() + 1):
            cluster = embedded[labels == lab]
            center = man.mean_center(cluster)
            if center is None:
                logger.warning("skipping partition with a zero-mean sphere cluster")
                ok = False
                break
            tot += float(np.sum(man.d_rec_embedded(cluster, center)))
        if ok and (best is None or tot < best):
            best = tot
            best_labels = labels
    if best is None:
        raise ArgumentError("no valid partition found")
    return best, best_labels


def forgy_init(embedded: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random data points as initial centers."""
    idx = rng.choice(len(embedded), size=k, replace=False)
    return embedded[idx].copy()


def skm_lloyd(embedded: np.ndarray, centers: np.ndarray, max_iters: int = 100,
              rel_tol: float = 1e-3):
    """Spherical k-means on embedded sphere points.

    Alternates loss assignment with the normalised-mean center update and
    stops when the relative improvement of the potential drops below
    ``rel_tol``.  An emptied cluster is re-seeded at the point farthest from
    its current centers.

    Returns ``(centers, potential trace, iterations)``.
    """
    embedded = np.asarray(embedded, dtype=float)
    centers = np.asarray(centers, dtype=float).copy()
    k = len(centers)
    trace = []
    iters = 0
    prev = float(np.sum(np.min(1.0 - embedded @ centers.T, axis=1)))
    for _ in range(max_iters):
        iters += 1
        d = 1.0 - embedded @ centers.T          # (n, k) reconstruction losses
        assign = np.argmin(d, axis=1)
        mind = d[np.arange(len(embedded)), assign]
        for lab in range(k):
            members = embedded[assign == lab]
            if len(members) == 0:
                far = int(np.argmax(mind))
                centers[lab] = embedded[far]
                assign[far] = lab
                mind[far] = 0.0
                continue
            m = members.mean(axis=0)
            n = float(np.linalg.norm(m))
            if n > 1e-12:
                centers[lab] = m / n
        d = 1.0 - embedded @ centers.T
        pot = float(np.sum(np.min(d, axis=1)))
        trace.append(pot)
        if prev - pot < rel_tol * max(prev, 1e-300):
            break
        prev = pot
    return centers, trace, iters


@dataclass(frozen=True)
class ClusterConfig:
    """Sphere experiment configuration (tangent plane of the 2-sphere)."""

    ks: tuple = (5, 10)
    n_points: int = 500
    runs: int = 3
    seed: int = 0
    gauss_std: float = 0.15
    uniform_radius: float = 0.3
    center_radius: float = 0.8 * np.pi
    max_iters: int = 200

    def __post_init__(self):
        if any(k < 1 or k > 50 for k in self.ks):
            raise ArgumentError("k range limited to [1, 50]")


def sample_mixture_on_tangent(k: int, n: int, cfg: ClusterConfig,
                              rng: np.random.Generator) -> np.ndarray:
    """Gaussian/uniform mixture with 2k components, clipped to the pi-ball.

    Component centers are uniform in a centered disc; half the components
    are isotropic Gaussians, half uniform discs.  Points falling outside
    the open pi-ball are rescaled radially.
    """
    comp = rng.integers(0, 2 * k, size=n)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=2 * k)
    radii = cfg.center_radius * np.sqrt(rng.uniform(size=2 * k))
    centers = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    pts = np.empty((n, 2))
    for i in range(n):
        c = comp[i]
        if c % 2 == 0:
            pts[i] = centers[c] + cfg.gauss_std * rng.standard_normal(2)
        else:
            ang = rng.uniform(0.0, 2.0 * np.pi)
            rad = cfg.uniform_radius * np.sqrt(rng.uniform())
            pts[i] = centers[c] + [rad * np.cos(ang), rad * np.sin(ang)]
    norms = np.linalg.norm(pts, axis=1)
    cap = manifolds.SPHERE_MAX_RADIUS - 1e-6
    over = norms > cap
    pts[over] *= (cap / norms[over])[:, None]
    return pts


CLUSTER_HEADER = ("k", "run", "pot_gkm", "pot_skm_forgy", "pot_skm_gkm",
                  "iters_forgy", "iters_gkm")


def run_cluster_experiment(cfg: ClusterConfig) -> list[tuple]:
    """Compare Forgy-seeded spherical k-means against geodesic seeding.

    Per run: draw a fresh mixture, then (i) spherical k-means from Forgy
    centers, (ii) geodesic seeding alone, (iii) spherical k-means from the
    geodesic seeds.  Returns one row per (k, run).
    """
    rows = []
    for ki, k in enumerate(cfg.ks):
        for run in range(cfg.runs):
            rng = stream(cfg.seed, ki, run)
            pts = sample_mixture_on_tangent(k, cfg.n_points, cfg, rng)
            embedded = SPHERE.embed(pts)

            seed_res = kmeanspp_seed(pts, k, SPHERE, rng)
            gkm_centers = SPHERE.embed(seed_res.centers)

            forgy = forgy_init(embedded, k, rng)
            _, trace_f, iters_f = skm_lloyd(embedded, forgy, cfg.max_iters)
            _, trace_g, iters_g = skm_lloyd(embedded, gkm_centers, cfg.max_iters)

            rows.append((k, run, seed_res.potential, trace_f[-1], trace_g[-1],
                         iters_f, iters_g))
    return rows


def write_cluster_csv(rows: Sequence[tuple], path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CLUSTER_HEADER)
        for k, run, pg, pf, psg, itf, itg in rows:
            writer.writerow([k, run, f"{pg:.17g}", f"{pf:.17g}", f"{psg:.17g}",
                             itf, itg])
    return path
