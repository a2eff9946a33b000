"""Command-line entry point for the verification suites and experiments.

Every subcommand is deterministic given ``--seed``: reruns with identical
flags produce byte-identical CSV output.  Floats are written with 17
significant digits so the values round-trip exactly.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import catalog, clustering, dre, geometry, lms
from .core import Scaler, squared_euclidean_generator, verify_scaled_identity
from .errors import Error
from .rng import stream

_IDENTITY_TOL = 1e-9


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _parse_rows(text: str, parser: argparse.ArgumentParser) -> list[catalog.Row]:
    if text == "all":
        return list(catalog.Row)
    rows = []
    by_name = {r.name: r for r in catalog.Row}
    by_value = {r.value: r for r in catalog.Row}
    for token in text.split(","):
        token = token.strip()
        if token in by_name:
            rows.append(by_name[token])
        elif token in by_value:
            rows.append(by_value[token])
        else:
            parser.error(f"unknown row id: {token}")
    return rows


def cmd_identity_check(args, parser) -> int:
    rows = _parse_rows(args.rows, parser)
    if args.negative_control:
        return _negative_control(args)
    failed = False
    print(f"{'row':<18} {'pairs':>6} {'max rel diff':>14} result")
    for i, row in enumerate(rows):
        entry = catalog.catalog_entry(row)
        rng = stream(args.seed, i)
        worst = 0.0
        worst_pair = None
        for _ in range(args.trials):
            x = entry.sample(rng)
            y = entry.sample(rng)
            chk = verify_scaled_identity(entry.gen, entry.scaler,
                                         entry.lift(x), entry.lift(y))
            rel = chk.absdiff / max(1.0, abs(chk.lhs))
            if rel > worst:
                worst, worst_pair = rel, (x, y)
        ok = worst <= _IDENTITY_TOL
        print(f"{row.name:<18} {args.trials:>6} {worst:>14.3e} {'pass' if ok else 'FAIL'}")
        if not ok:
            failed = True
            print(f"  offending pair:\n  x = {worst_pair[0]!r}\n  y = {worst_pair[1]!r}")
    return 1 if failed else 0


def _negative_control(args) -> int:
    """Deliberately violating pair; expected to fail the tolerance."""
    gen = squared_euclidean_generator(0.0)
    gauge = Scaler(lambda x: 1.0 + float(np.linalg.norm(x)),
                   lambda x: x / float(np.linalg.norm(x)), name="1+l2")
    rng = stream(args.seed, 999)
    worst = 0.0
    worst_pair = None
    for _ in range(args.trials):
        x = rng.standard_normal(4)
        y = rng.standard_normal(4)
        chk = verify_scaled_identity(gen, gauge, x, y, check_preconditions=False)
        rel = chk.absdiff / max(1.0, abs(chk.lhs))
        if rel > worst:
            worst, worst_pair = rel, (x, y)
    ok = worst <= _IDENTITY_TOL
    print(f"{'negative-control':<18} {args.trials:>6} {worst:>14.3e} "
          f"{'pass' if ok else 'FAIL'}")
    if not ok:
        print(f"  offending pair:\n  x = {worst_pair[0]!r}\n  y = {worst_pair[1]!r}")
    return 1 if not ok else 0


def cmd_dre(args) -> int:
    sizes = tuple(int(s) for s in args.sizes.split(","))
    cfg = dre.H1Config(sizes=sizes, trials=args.trials, seed=args.seed,
                       n_classes=args.classes, dim=args.dim, epochs=args.epochs)
    rows = dre.run_h1_experiment(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "dre_divergence.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(dre.H1_HEADER)
        for n, trial, div in rows:
            writer.writerow([n, trial, _fmt(div)])
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_dnplms(args) -> int:
    ps = [float(p) for p in args.p.split(",")]
    rhos = [float(r) for r in args.rho.split(",")]
    spec = lms.StreamSpec(d=args.d, target_kind=args.target, noise_std=args.noise_std,
                          horizon=args.horizon, switch_period=args.switch_period,
                          x_bound=args.xbound, gamma=args.gamma)
    cfgs = [lms.LqConfig.from_p(p, W=args.W) for p in ps]
    cells = lms.run_h2_experiment(spec, cfgs, rhos, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for cell in cells:
        path = lms.write_cell_csv(cell, out)
        print(f"wrote {path} ({cell.table.shape[0]} rows)")
    return 0


def cmd_cluster(args) -> int:
    cfg = clustering.ClusterConfig(ks=tuple(int(k) for k in args.ks.split(",")),
                                   n_points=args.n, runs=args.runs, seed=args.seed)
    rows = clustering.run_cluster_experiment(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = clustering.write_cluster_csv(rows, out / "cluster_sphere.csv")
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_geom(args) -> int:
    ok = True
    for i, row in enumerate((catalog.Row.CosineRowI, catalog.Row.SimplexKLRowV)):
        entry = catalog.catalog_entry(row)
        rng = stream(args.seed, i)
        samples = [entry.sample(rng) for _ in range(args.trials)]
        x, y = entry.sample(rng), entry.sample(rng)
        worst = 0.0
        for z in samples:
            lhs, rhs = geometry.residual_scaling_gap(entry.gen, entry.scaler, x, y, z)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
        center = entry.sample(rng)
        radius = 0.5
        ball = geometry.scaled_ball_equivalence(entry.gen, entry.scaler, center,
                                                radius, samples)
        bis = geometry.bisector_equivalence(entry.gen, entry.scaler, x, y, samples)
        row_ok = worst <= _IDENTITY_TOL and ball == 1.0 and bis == 1.0
        ok = ok and row_ok
        print(f"{row.name:<18} residual {worst:.3e}  ball agree {ball:.3f}  "
              f"bisector agree {bis:.3f}  {'pass' if row_ok else 'FAIL'}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaugebregman",
        description="Scaled-divergence verification suites and experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identity-check", help="verify the scaled identity per catalog row")
    p.add_argument("--rows", default="all", help="comma list of row ids (default: all)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--negative-control", action="store_true",
                   help="run a deliberately violating pair instead")

    p = sub.add_parser("dre", help="density-ratio sample-size sweep")
    p.add_argument("--sizes", default="256,1024")
    p.add_argument("--trials", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--out", default=".")

    p = sub.add_parser("dnplms", help="p-LMS vs dual-norm p-LMS stream comparison")
    p.add_argument("--p", default="6.9")
    p.add_argument("--rho", default="1.0")
    p.add_argument("--target", default="dense", choices=["dense", "sparse"])
    p.add_argument("--horizon", type=int, default=50_000)
    p.add_argument("--switch-period", type=int, default=1000)
    p.add_argument("--d", type=int, default=20)
    p.add_argument("--noise-std", type=float, default=0.1)
    p.add_argument("--xbound", type=float, default=1.0)
    p.add_argument("--W", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")

    p = sub.add_parser("cluster", help="sphere clustering: seeding vs Forgy")
    p.add_argument("--ks", default="5,10")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")

    p = sub.add_parser("geom", help="ball and bisector gauge equivalences")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "identity-check":
            return cmd_identity_check(args, parser)
        if args.command == "dre":
            return cmd_dre(args)
        if args.command == "dnplms":
            return cmd_dnplms(args)
        if args.command == "cluster":
            return cmd_cluster(args)
        if args.command == "geom":
            return cmd_geom(args)
        parser.error(f"unknown command {args.command!r}")
    except (Error, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
