"""Fixed-seed property suites behind ``dbnot verify``.

Each check compares a solver component with an independent oracle from
:mod:`dbnot.oracles` or with a convergence certificate, and returns a
:class:`Check` carrying a pass flag and a short detail string.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import metrics
from .constraints import DualBoundedSet, check_feasible, dykstra_project, project_row_simplex, project_simplex_sort
from .entropic import feasible_gradient_entropic
from .graph import initial_plan, random_connected_graph
from .linalg import SparseAffinity
from .mincut import ConvexLaplacianOracle, MinCutOracle, line_search_mincut
from .oracles import (
    accuracy_brute,
    ari_brute,
    best_hard_mincut,
    lp_minimum,
    nmi_brute,
    qp_projection,
)
from .solver import SolveConfig, solve

SUITES = ("projections", "convergence", "metrics", "all")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


def random_affinity(rng: np.random.Generator, n: int, density: float = 0.5) -> np.ndarray:
    return random_connected_graph(n, density, rng)


def random_bounds(rng: np.random.Generator, n: int, c: int) -> DualBoundedSet:
    return DualBoundedSet(n, c, float(rng.uniform(0, n / c)), float(rng.uniform(n / c, n)))


def check_dykstra_vs_qp(instances: int = 200, seed: int = 0, tol: float = 1e-6) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        c = int(rng.integers(2, 4))
        n = int(rng.integers(c, 7))
        omega = random_bounds(rng, n, c)
        M = rng.normal(0.0, 1.0, (n, c)) * rng.choice([0.3, 1.0, 3.0])
        ref = qp_projection(M, omega)
        worst = max(worst, float(np.linalg.norm(dykstra_project(M, omega) - ref.plan)))
    return Check("dykstra matches QP oracle", worst <= tol, f"{instances} instances, worst distance {worst:.2e}")


def check_simplex_newton(instances: int = 1000, seed: int = 1, tol: float = 1e-10) -> Check:
    rng = np.random.default_rng(seed)
    V = rng.uniform(-10.0, 10.0, (instances, 10))
    worst = float(np.abs(project_row_simplex(V) - project_simplex_sort(V)).max())
    return Check("Newton simplex projection matches sort", worst <= tol, f"worst {worst:.2e}")


def check_entropic_lp(seed: int = 2, instances: int = 20) -> Check:
    rng = np.random.default_rng(seed)
    worst_gap = worst_rise = worst_col = 0.0
    for _ in range(instances):
        omega = DualBoundedSet(6, 3, float(rng.uniform(0, 1.8)), float(rng.uniform(2.2, 4.0)))
        G = rng.standard_normal(omega.shape)
        lp, _ = lp_minimum(G, omega)
        vals = []
        for delta in (0.2, 0.1, 0.05, 0.025, 0.0125):
            P = feasible_gradient_entropic(G, omega, delta)
            rep = check_feasible(P, omega)
            worst_col = max(worst_col, float(rep.bound_violations.max()))
            vals.append(float(np.sum(G * P)))
        worst_rise = max(worst_rise, float(np.diff(vals).max()))
        worst_gap = max(worst_gap, vals[-1] - lp)
    ok = worst_gap < 1e-2 and worst_rise <= 1e-9 and worst_col <= 1e-4
    return Check("entropic scaling approaches LP optimum", ok,
                 f"LP gap {worst_gap:.2e}, max rise {worst_rise:.1e}, column excess {worst_col:.1e}")


def check_line_search(instances: int = 200, seed: int = 3) -> Check:
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, 1001)
    worst = -np.inf
    for _ in range(instances):
        n, c = int(rng.integers(3, 9)), int(rng.integers(2, 4))
        S = SparseAffinity(random_affinity(rng, n))
        F = project_row_simplex(rng.random((n, c)))
        P = project_row_simplex(rng.random((n, c)) * 3)
        A = S.toarray()
        mu = line_search_mincut(S, F, P)

        def h(m):
            G = (1 - m) * F + m * P
            return -float(np.sum(G * (A @ G)))

        worst = max(worst, h(mu) - min(h(m) for m in grid))
    return Check("closed-form line search beats grid", worst <= 1e-9, f"worst excess {worst:.2e}")


def projection_suite() -> list[Check]:
    return [check_dykstra_vs_qp(), check_simplex_newton(), check_entropic_lp(), check_line_search()]


def _convex_instance(seed: int, n: int = 30, c: int = 3):
    rng = np.random.default_rng(seed)
    S = SparseAffinity(random_affinity(rng, n, 0.3))
    return ConvexLaplacianOracle(S), DualBoundedSet(n, c, 0.0, float(n))


def check_convex_certificate(seed: int = 4) -> Check:
    oracle, omega = _convex_instance(seed)
    F0 = initial_plan(omega, "uniform", seed=seed, jitter=0.3)
    L, n = oracle.smoothness, omega.n
    worst = -np.inf
    for step in ("easy", "line", "gap"):
        rep = solve(oracle, omega, F0, SolveConfig(step=step, gap_tol=0.0))
        t = np.arange(1, rep.iterations + 1)
        # the minimum over the row simplex is 0, attained by the uniform plan
        worst = max(worst, float(np.max(rep.objective - 4 * n * L / (t + 1))))
    return Check("convex rate 4nL/(t+1)", worst <= 0.0, f"max excess over bound {worst:.3g}")


def check_gap_dominance(seed: int = 5) -> Check:
    oracle, omega = _convex_instance(seed)
    F0 = initial_plan(omega, "uniform", seed=seed, jitter=0.3)
    worst = -np.inf
    for step in ("easy", "line", "gap"):
        rep = solve(oracle, omega, F0, SolveConfig(step=step, gap_tol=0.0, delta=1e-12))
        worst = max(worst, float(np.max(rep.objective - rep.gaps - 1e-8)))
    return Check("dual gap dominates suboptimality", worst <= 0.0, f"max violation {worst:.3g}")


def check_nonconvex_certificate(seed: int = 6, instances: int = 6) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(instances):
        n = int(rng.integers(6, 11))
        c = int(rng.integers(2, 4))
        A = random_affinity(rng, n)
        omega = DualBoundedSet(n, c, float(np.floor(0.7 * n / c)), float(np.ceil(1.3 * n / c)))
        h_best, _ = best_hard_mincut(A, c, omega.b_l, omega.b_u)
        oracle = MinCutOracle(SparseAffinity(A))
        F0 = initial_plan(omega, "uniform", seed=k, jitter=0.2)
        rep = solve(oracle, omega, F0, SolveConfig(step="nonconvex", gap_tol=0.0))
        t = np.arange(1, rep.iterations + 1)
        bound = max(2 * (oracle.value(F0) - h_best), 2 * n * oracle.smoothness) / np.sqrt(t + 1)
        worst = max(worst, float(np.max(np.minimum.accumulate(rep.gaps) / bound)))
    return Check("nonconvex running-min gap rate", worst <= 1.0, f"max ratio to bound {worst:.3f}")


def check_feasibility_invariance(seed: int = 7) -> Check:
    rng = np.random.default_rng(seed)
    n, c = 50, 3
    S = SparseAffinity(random_affinity(rng, n, 0.2))
    omega = DualBoundedSet(n, c, 14.0, 19.0)
    oracle = MinCutOracle(S)
    F0 = initial_plan(omega, "uniform", seed=seed, jitter=0.2)
    worst = 0.0
    for measure in ("inner", "norm"):
        for step in ("easy", "line", "gap", "nonconvex"):
            rep = solve(oracle, omega, F0, SolveConfig(measure=measure, step=step, max_iter=100,
                                                       gap_tol=0.0, record_history=True))
            for F in rep.history:
                worst = max(worst, check_feasible(F, omega).max_violation)
    return Check("iterates stay feasible", worst <= 1e-7, f"max violation {worst:.2e}")


def convergence_suite() -> list[Check]:
    return [check_convex_certificate(), check_gap_dominance(), check_nonconvex_certificate(),
            check_feasibility_invariance()]


def check_metrics_exhaustive(n: int = 6, max_c: int = 3) -> Check:
    worst_acc = worst_nmi = worst_ari = 0.0
    labelings = [np.array(p) for p in itertools.product(range(max_c), repeat=n)]
    rng = np.random.default_rng(8)
    truths = [labelings[i] for i in rng.choice(len(labelings), 8, replace=False)]
    for truth in truths:
        for pred in labelings:
            worst_acc = max(worst_acc, abs(metrics.accuracy(pred, truth) - accuracy_brute(pred, truth)))
            worst_nmi = max(worst_nmi, abs(metrics.nmi(pred, truth) - nmi_brute(pred, truth)))
            worst_ari = max(worst_ari, abs(metrics.ari(pred, truth) - ari_brute(pred, truth)))
    ok = worst_acc == 0.0 and worst_nmi <= 1e-12 and worst_ari <= 1e-12
    return Check("metrics match brute force", ok,
                 f"acc {worst_acc:.1e}, nmi {worst_nmi:.1e}, ari {worst_ari:.1e}")


def check_metric_permutation(seed: int = 9) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        truth = rng.integers(0, 4, 40)
        pred = rng.integers(0, 4, 40)
        perm = rng.permutation(4)
        for fn in (metrics.accuracy, metrics.nmi, metrics.ari):
            worst = max(worst, abs(fn(pred, truth) - fn(perm[pred], truth)))
    return Check("metrics invariant to relabeling", worst <= 1e-12, f"worst {worst:.1e}")


def metrics_suite() -> list[Check]:
    return [check_metrics_exhaustive(), check_metric_permutation()]


def run_suite(name: str) -> list[Check]:
    if name == "projections":
        return projection_suite()
    if name == "convergence":
        return convergence_suite()
    if name == "metrics":
        return metrics_suite()
    if name == "all":
        return projection_suite() + convergence_suite() + metrics_suite()
    raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
