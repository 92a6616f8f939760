"""``dbnot`` command line: size-constrained min-cut clustering, verification
suites and the convex Laplacian demo.

Exit codes: 0 success, 1 runtime failure (unreadable input, infeasible bounds,
failed verification), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__, metrics
from .constraints import DualBoundedSet, check_feasible
from .graph import (
    INIT_MODES,
    LabeledDataset,
    generate_two_moons,
    generate_two_rings,
    initial_plan,
    knn_gaussian_affinity,
    normalize_features,
    random_connected_graph,
    read_csv,
)
from .linalg import SparseAffinity
from .mincut import ConvexLaplacianOracle, MinCutOracle
from .solver import SolveConfig, solve
from .verify import SUITES, run_suite

logger = logging.getLogger("dbnot")

SCHEMA_VERSION = 1
DATASETS = ("two-rings", "two-moons")
MEASURES = ("inner", "norm")
STEPS = ("easy", "line", "gap", "nonconvex")


class CommandError(Exception):
    """A failure reported to the user as ``error: ...`` with exit status 1."""


# ---------------------------------------------------------------- output helpers


def atomic_write_text(path: Path, text: str) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(x) -> str:
    return repr(float(x))


def write_trace(path: Path, objective, gaps) -> None:
    rows = [(t + 1, _num(h), _num(g)) for t, (h, g) in enumerate(zip(objective, gaps))]
    atomic_write_text(path, csv_text(("iter", "objective", "gap"), rows))


def write_plan(path: Path, F: np.ndarray) -> None:
    header = ["index"] + [f"c{j}" for j in range(F.shape[1])]
    rows = [[i] + [_num(v) for v in row] for i, row in enumerate(F)]
    atomic_write_text(path, csv_text(header, rows))


def _json_float(x: float):
    x = float(x)
    return x if np.isfinite(x) else None


# ---------------------------------------------------------------- cluster


def load_dataset(args) -> LabeledDataset:
    if args.input is not None:
        try:
            return read_csv(args.input)
        except (OSError, ValueError, UnicodeDecodeError) as exc:
            raise CommandError(f"cannot read {args.input}: {exc}") from exc
    seed = args.seed if args.data_seed is None else args.data_seed
    if args.dataset == "two-rings":
        return generate_two_rings(args.n_per_cluster, args.noise, seed)
    return generate_two_moons(args.n_per_cluster, args.noise, seed)


def bounds_for(args, n: int) -> DualBoundedSet:
    try:
        if args.b_l is not None or args.b_u is not None:
            if args.b_l is None or args.b_u is None:
                raise CommandError("--b-l and --b-u must be given together")
            return DualBoundedSet(n, args.c, float(args.b_l), float(args.b_u))
        return DualBoundedSet.from_slack(n, args.c, args.balance)
    except ValueError as exc:
        raise CommandError(f"infeasible bounds: {exc}") from exc


def cmd_cluster(args) -> int:
    timings = {}
    clock = time.perf_counter()

    def lap(name):
        nonlocal clock
        now = time.perf_counter()
        timings[name] = timings.get(name, 0.0) + now - clock
        clock = now

    data = load_dataset(args)
    lap("load")
    omega = bounds_for(args, data.n)
    if not 1 <= args.k < data.n:
        raise CommandError(f"--k must lie in [1, {data.n - 1}] for n={data.n}")
    Z = data.features if args.no_normalize else normalize_features(data.features)
    S = knn_gaussian_affinity(Z, args.k, sigma=args.sigma)
    lap("graph")
    F0 = initial_plan(omega, args.init, Z=Z, seed=args.seed, S=S)
    lap("init")
    config = SolveConfig(measure=args.measure, step=args.step, max_iter=args.max_iter,
                         gap_tol=args.gap_tol, seed=args.seed)
    report = solve(MinCutOracle(S), omega, F0, config)
    lap("solve")
    for phase, secs in report.timings.items():
        timings[f"solve.{phase}"] = secs

    F = report.solution
    labels = metrics.labels_from_plan(F)
    feas = check_feasible(F, omega)
    colsums = F.sum(axis=0)
    sizes = metrics.cluster_sizes(labels, omega.c)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "labels.csv", csv_text(("index", "label"), enumerate(labels.tolist())))
    write_trace(out / "trace.csv", report.objective, report.gaps)
    atomic_write_text(out / "colsum.csv", csv_text(
        ("cluster", "column_sum", "b_l", "b_u"),
        [(j, _num(s), _num(omega.b_l), _num(omega.b_u)) for j, s in enumerate(colsums)]))
    write_plan(out / "plan.csv", F)

    scores = None
    if data.labels is not None:
        scores = {
            "acc": metrics.accuracy(labels, data.labels),
            "nmi": metrics.nmi(labels, data.labels),
            "ari": metrics.ari(labels, data.labels),
        }
    lap("write")
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "cluster",
        "config": {
            "input": None if args.input is None else str(args.input),
            "dataset": args.dataset if args.input is None else None,
            "n_per_cluster": args.n_per_cluster if args.input is None else None,
            "noise": args.noise if args.input is None else None,
            "c": omega.c,
            "b_l": omega.b_l,
            "b_u": omega.b_u,
            "balance": args.balance if args.b_l is None else None,
            "k": args.k,
            "sigma": args.sigma,
            "normalize": not args.no_normalize,
            "init": args.init,
            "measure": config.measure.value,
            "step": config.step.value,
            "max_iter": config.max_iter,
            "gap_tol": config.gap_tol,
            "seed": args.seed,
        },
        "n": data.n,
        "iterations": report.iterations,
        "stop_reason": report.stop_reason,
        "best_gap_index": report.best_index,
        "best_iteration": report.best_iteration,
        "objective_trace": [_json_float(v) for v in report.objective],
        "gap_trace": [_json_float(v) for v in report.gaps],
        "step_trace": [_json_float(v) for v in report.steps],
        "objective": _json_float(report.objective[report.best_index]),
        "metrics": scores,
        "cluster_sizes": sizes.tolist(),
        "column_sums": [_json_float(v) for v in colsums],
        "max_feasibility_violation": feas.max_violation,
        "timings": timings,
    }
    atomic_write_text(out / "report.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")

    summary = f"n={data.n} c={omega.c} bounds=[{omega.b_l:g}, {omega.b_u:g}] iterations={report.iterations} " \
              f"best_iteration={report.best_iteration} objective={doc['objective']:.6g}"
    if scores is not None:
        summary += " " + " ".join(f"{k}={v:.4f}" for k, v in scores.items())
    print(summary)
    print(f"cluster sizes: {sizes.tolist()}")
    return 0


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    failed = 0
    for check in run_suite(args.suite):
        status = "PASS" if check.passed else "FAIL"
        failed += not check.passed
        print(f"{status}  {check.name}: {check.detail}", flush=True)
    print(f"{args.suite}: {'all checks passed' if not failed else f'{failed} check(s) failed'}")
    return 1 if failed else 0


# ---------------------------------------------------------------- convex demo


def run_convex_demo(n: int, c: int, seed: int, max_iter: int = 50, bounds: str = "balanced",
                    measure: str = "inner", step: str = "line", density: float = 0.5):
    """Minimize ``tr(F^T Lap F)`` on a random connected graph from a random plan.

    ``bounds="balanced"`` pins every column sum to ``n/c``, which makes the
    uniform plan the unique minimizer; ``bounds="simplex"`` keeps only the row
    constraints, where every plan with identical rows is optimal.
    """
    if bounds == "balanced":
        omega = DualBoundedSet(n, c, n / c, n / c)
    else:
        omega = DualBoundedSet(n, c, 0.0, float(n))
    oracle = ConvexLaplacianOracle(SparseAffinity(random_connected_graph(n, density, seed)))
    F0 = initial_plan(omega, "random", seed=seed)
    report = solve(oracle, omega, F0, SolveConfig(measure=measure, step=step, max_iter=max_iter,
                                                  gap_tol=0.0, select="last"))
    return report, omega


def cmd_convex_demo(args) -> int:
    try:
        report, omega = run_convex_demo(args.n, args.c, args.seed, args.max_iter, args.bounds,
                                        args.measure, args.step)
    except ValueError as exc:
        raise CommandError(str(exc)) from exc
    F = report.final_plan
    dev = float(np.abs(F - 1.0 / omega.c).max())
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_trace(out / "trace.csv", report.objective, report.gaps)
        write_plan(out / "plan.csv", F)
    print(f"n={omega.n} c={omega.c} bounds={args.bounds} iterations={report.iterations} "
          f"objective={report.final_objective:.3e} max|F_ij - 1/c|={dev:.3e}")
    if dev >= args.tol:
        print(f"deviation {dev:.3e} is not below {args.tol:g}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dbnot", description="Dual-bounded nonlinear Frank-Wolfe solver")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cluster", help="size-constrained min-cut clustering")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="CSV, one sample per line, optional final 'label' column")
    src.add_argument("--dataset", choices=DATASETS, help="built-in synthetic dataset")
    c.add_argument("--n-per-cluster", type=int, default=100, help="synthetic samples per class")
    c.add_argument("--noise", type=float, default=0.05, help="synthetic noise level")
    c.add_argument("--data-seed", type=int, default=None, help="synthetic data seed (default: --seed)")
    c.add_argument("--c", type=int, required=True, help="number of clusters")
    c.add_argument("--balance", type=float, default=0.1,
                   help="slack s: b_l = floor((1-s) n/c), b_u = ceil((1+s) n/c)")
    c.add_argument("--b-l", type=float, default=None, help="explicit lower column-sum bound")
    c.add_argument("--b-u", type=float, default=None, help="explicit upper column-sum bound")
    c.add_argument("--k", type=int, default=10, help="nearest neighbours in the affinity graph")
    c.add_argument("--sigma", type=float, default=None, help="kernel width (default: mean pairwise distance)")
    c.add_argument("--no-normalize", action="store_true", help="skip per-feature standardization")
    c.add_argument("--init", choices=INIT_MODES, default="spectral", help="starting plan")
    c.add_argument("--measure", choices=MEASURES, default="inner")
    c.add_argument("--step", choices=STEPS, default="line")
    c.add_argument("--max-iter", type=int, default=500)
    c.add_argument("--gap-tol", type=float, default=1e-9)
    c.add_argument("--seed", type=int, default=42)
    c.add_argument("--out", type=Path, required=True, help="output directory")
    c.set_defaults(func=cmd_cluster)

    v = sub.add_parser("verify", help="run fixed-seed oracle and certificate suites")
    v.add_argument("--suite", choices=SUITES, default="all")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("convex-demo", help="convex Laplacian problem converging to the uniform plan")
    d.add_argument("--n", type=int, default=60)
    d.add_argument("--c", type=int, default=3)
    d.add_argument("--seed", type=int, default=7)
    d.add_argument("--max-iter", type=int, default=50)
    d.add_argument("--bounds", choices=("balanced", "simplex"), default="balanced")
    d.add_argument("--measure", choices=MEASURES, default="inner")
    d.add_argument("--step", choices=STEPS, default="line")
    d.add_argument("--tol", type=float, default=1e-3, help="required max deviation from 1/c")
    d.add_argument("--out", type=Path, default=None, help="write trace.csv and plan.csv here")
    d.set_defaults(func=cmd_convex_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "max_iter", 1) < 1:
        parser.error("--max-iter must be at least 1")
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
