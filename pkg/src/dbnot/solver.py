"""Dual-bounded nonlinear Frank-Wolfe (DNF).

Each iteration computes the objective gradient, finds a feasible direction
endpoint inside the constraint set (by Euclidean projection or by entropic
linear minimization), measures the dual gap, picks a step size and moves by a
convex combination, which keeps every iterate feasible.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import entropic
from .constraints import (
    DEFAULT_DYKSTRA_MAX_ITER,
    DEFAULT_DYKSTRA_TOL,
    DualBoundedSet,
    check_feasible,
    dykstra,
    dykstra_project,
)

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-8
GAP_ROUNDOFF = 1e-12
STALL_LIMIT = 3


class ObjectiveOracle:
    """A smooth objective over ``n x c`` plans.

    Subclasses set ``smoothness`` (a Lipschitz constant of the gradient in
    Frobenius norm) and implement :meth:`value` and :meth:`gradient`.
    :meth:`line_search` may return the exact minimizing step along
    ``F -> P``; the default returns ``None`` and the solver falls back to a
    bounded scalar search.
    """

    smoothness: float

    def value(self, F) -> float:
        raise NotImplementedError

    def gradient(self, F) -> np.ndarray:
        raise NotImplementedError

    def line_search(self, F, P) -> float | None:
        return None


class Measure(str, enum.Enum):
    NORM = "norm"
    INNER = "inner"


class StepRule(str, enum.Enum):
    EASY = "easy"
    LINE = "line"
    GAP = "gap"
    NONCONVEX = "nonconvex"


@dataclass(frozen=True)
class SolveConfig:
    measure: Measure = Measure.INNER
    step: StepRule = StepRule.EASY
    max_iter: int = 500
    gap_tol: float = 1e-9
    seed: int = 0
    record_history: bool = False
    # "best_gap" returns the recorded iterate whose gap is closest to 0, "last" the final one
    select: str = "best_gap"
    # inner-product measure: absolute delta, or delta_scale * gradient range when None
    delta: float | None = None
    delta_scale: float = entropic.DEFAULT_DELTA_SCALE
    entropic_tol: float = entropic.DEFAULT_TOL
    entropic_max_iter: int = entropic.DEFAULT_MAX_ITER
    # norm measure: project F - norm_scale * grad (1/L when None);
    # norm_literal projects -grad itself
    norm_scale: float | None = None
    norm_literal: bool = False
    dykstra_tol: float = DEFAULT_DYKSTRA_TOL
    dykstra_max_iter: int = DEFAULT_DYKSTRA_MAX_ITER

    def __post_init__(self):
        object.__setattr__(self, "measure", Measure(self.measure))
        object.__setattr__(self, "step", StepRule(self.step))
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.select not in ("best_gap", "last"):
            raise ValueError(f"select must be 'best_gap' or 'last', got {self.select!r}")


@dataclass
class SolveReport:
    objective: np.ndarray
    gaps: np.ndarray
    steps: np.ndarray
    best_index: int
    best_plan: np.ndarray
    final_plan: np.ndarray
    final_objective: float
    stop_reason: str
    timings: dict = field(default_factory=dict)
    history: list | None = None

    @property
    def iterations(self) -> int:
        return len(self.gaps)

    @property
    def best_iteration(self) -> int:
        """1-based iteration number of the selected iterate."""
        return self.best_index + 1

    @property
    def solution(self) -> np.ndarray:
        return self.best_plan


def dual_gap(F, P, grad) -> float:
    """``<F - P, grad>``."""
    F = np.asarray(F, dtype=np.float64)
    P = np.asarray(P, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if not F.shape == P.shape == grad.shape:
        raise ValueError(f"shape mismatch: F {F.shape}, P {P.shape}, grad {grad.shape}")
    return float(np.sum((F - P) * grad))


def step_easy(t: int) -> float:
    if t < 1:
        raise ValueError(f"iteration index must be >= 1, got {t}")
    return 2.0 / (t + 2.0)


def step_dual_gap(g: float, L: float, diff) -> float:
    """``min(g / (L ||diff||_F^2), 1)``."""
    if L <= 0:
        raise ValueError("smoothness constant must be positive")
    g = max(g, 0.0)
    if g == 0.0:
        return 0.0
    sq = float(np.sum(np.asarray(diff, dtype=np.float64) ** 2))
    if sq == 0.0:
        raise ValueError(f"positive gap {g:g} with a null direction")
    return min(g / (L * sq), 1.0)


def step_nonconvex(g: float, L: float, n: int) -> float:
    """``min(g / (2 L n), 1)``."""
    if L <= 0:
        raise ValueError("smoothness constant must be positive")
    return min(max(g, 0.0) / (2.0 * L * n), 1.0)


def dnf_step(F, P, mu: float) -> np.ndarray:
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"step must lie in [0, 1], got {mu}")
    F = np.asarray(F, dtype=np.float64)
    P = np.asarray(P, dtype=np.float64)
    return (1.0 - mu) * F + mu * P


def feasible_direction(F, grad, omega: DualBoundedSet, oracle: ObjectiveOracle, config: SolveConfig) -> np.ndarray:
    """Endpoint of the Frank-Wolfe direction under the configured measure."""
    if config.measure is Measure.NORM:
        if config.norm_literal:
            target = -grad
        else:
            s = config.norm_scale if config.norm_scale is not None else 1.0 / oracle.smoothness
            target = F - s * grad
        res = dykstra(target, omega, tol=config.dykstra_tol, max_iter=config.dykstra_max_iter)
        if not res.converged:
            logger.debug("Dykstra hit %d sweeps in the norm measure", res.iterations)
        return res.plan
    delta = config.delta if config.delta is not None else entropic.default_delta(grad, config.delta_scale)
    P = entropic.scale(grad, omega, delta, tol=config.entropic_tol, max_iter=config.entropic_max_iter).plan()
    if not check_feasible(P, omega, tol=1e-10):
        # unconverged scaling leaves a small column residual; project it away
        P = dykstra_project(P, omega, tol=config.dykstra_tol, max_iter=config.dykstra_max_iter)
    return P


def _numeric_line_search(oracle: ObjectiveOracle, F, P) -> float:
    d = P - F
    res = minimize_scalar(lambda m: oracle.value(F + m * d), bounds=(0.0, 1.0), method="bounded",
                          options={"xatol": 1e-10})
    cands = [(oracle.value(F), 0.0), (oracle.value(P), 1.0), (float(res.fun), float(res.x))]
    return min(cands)[1]


def solve(oracle: ObjectiveOracle, omega: DualBoundedSet, F0, config: SolveConfig | None = None) -> SolveReport:
    """Run DNF from the feasible plan ``F0``."""
    config = config or SolveConfig()
    F = np.array(F0, dtype=np.float64, copy=True)
    feas = check_feasible(F, omega, FEASIBILITY_TOL)
    if not feas:
        raise ValueError(f"initial plan is infeasible (max violation {feas.max_violation:.3g})")
    L = float(oracle.smoothness)
    if not L > 0:
        raise ValueError("oracle smoothness constant must be positive")

    objective, gaps, steps = [], [], []
    history = [] if config.record_history else None
    timings = {"gradient": 0.0, "direction": 0.0, "step": 0.0, "update": 0.0}
    best_abs, best_index, best_plan = math.inf, 0, F
    stalled = 0
    stop_reason = "max_iter"

    for t in range(1, config.max_iter + 1):
        t0 = time.perf_counter()
        grad = np.asarray(oracle.gradient(F), dtype=np.float64)
        if grad.shape != F.shape:
            raise ValueError(f"oracle gradient has shape {grad.shape}, expected {F.shape}")
        value = float(oracle.value(F))
        t1 = time.perf_counter()
        P = feasible_direction(F, grad, omega, oracle, config)
        t2 = time.perf_counter()
        g = dual_gap(F, P, grad)
        if abs(g) < GAP_ROUNDOFF:
            g = 0.0
        objective.append(value)
        gaps.append(g)
        if history is not None:
            history.append(F.copy())
        if abs(g) < best_abs:
            best_abs, best_index, best_plan = abs(g), t - 1, F
        timings["gradient"] += t1 - t0
        timings["direction"] += t2 - t1
        if abs(g) <= config.gap_tol:
            steps.append(0.0)
            stop_reason = "gap_tol"
            break

        if config.step is StepRule.EASY:
            mu = step_easy(t)
        elif config.step is StepRule.LINE:
            mu = oracle.line_search(F, P)
            if mu is None:
                mu = _numeric_line_search(oracle, F, P)
        elif config.step is StepRule.GAP:
            mu = step_dual_gap(g, L, P - F)
        else:
            mu = step_nonconvex(g, L, omega.n)
        mu = float(min(max(mu, 0.0), 1.0))
        steps.append(mu)
        t3 = time.perf_counter()
        timings["step"] += t3 - t2

        stalled = stalled + 1 if mu == 0.0 else 0
        if stalled >= STALL_LIMIT:
            stop_reason = "stationary"
            break
        if mu > 0.0:
            F = dnf_step(F, P, mu)
        timings["update"] += time.perf_counter() - t3

    chosen = best_plan if config.select == "best_gap" else F
    if config.select == "last":
        best_index = len(gaps) - 1
    return SolveReport(
        objective=np.asarray(objective),
        gaps=np.asarray(gaps),
        steps=np.asarray(steps),
        best_index=best_index,
        best_plan=np.array(chosen, copy=True),
        final_plan=F,
        final_objective=float(oracle.value(F)),
        stop_reason=stop_reason,
        timings=timings,
        history=history,
    )
