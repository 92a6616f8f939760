"""The dual-bounded constraint set and Euclidean projections onto it.

The set is

    {X : X 1_c = 1_n,  b_l <= X^T 1_n <= b_u,  X >= 0}

and is handled as the intersection of three simple pieces: the row simplex,
the column lower half-spaces and the column upper half-spaces. Each piece has a
closed-form projection; :func:`dykstra_project` composes them.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_FEAS_TOL = 1e-8
DEFAULT_DYKSTRA_TOL = 1e-8
DEFAULT_DYKSTRA_MAX_ITER = 20000
NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-10


class EmptyConstraintSetError(ValueError):
    """Raised when the column bounds admit no plan."""


class ApproximateProjectionWarning(RuntimeWarning):
    """Dykstra's loop hit its iteration cap before meeting the tolerance."""


@dataclass(frozen=True)
class DualBoundedSet:
    """Plans with unit row sums and column sums in ``[b_l, b_u]``."""

    n: int
    c: int
    b_l: float
    b_u: float

    def __post_init__(self):
        if self.c < 2:
            raise ValueError(f"need at least 2 clusters, got c={self.c}")
        if self.n < self.c:
            raise ValueError(f"need n >= c, got n={self.n}, c={self.c}")
        if self.b_l < 0:
            raise ValueError(f"b_l must be nonnegative, got {self.b_l}")
        if self.b_l > self.b_u:
            raise EmptyConstraintSetError(f"b_l={self.b_l} exceeds b_u={self.b_u}")
        if self.c * self.b_l > self.n or self.n > self.c * self.b_u:
            raise EmptyConstraintSetError(
                f"no plan satisfies c*b_l <= n <= c*b_u "
                f"(n={self.n}, c={self.c}, b_l={self.b_l}, b_u={self.b_u})"
            )

    @classmethod
    def from_slack(cls, n: int, c: int, slack: float) -> "DualBoundedSet":
        """Bounds ``floor((1-slack) n/c)`` and ``ceil((1+slack) n/c)``."""
        if slack < 0:
            raise ValueError("slack must be nonnegative")
        b_l = max(0, int(np.floor((1.0 - slack) * n / c + 1e-12)))
        b_u = int(np.ceil((1.0 + slack) * n / c - 1e-12))
        return cls(n, c, float(b_l), float(b_u))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.c)

    def uniform(self) -> np.ndarray:
        return np.full(self.shape, 1.0 / self.c)


@dataclass(frozen=True)
class FeasibilityReport:
    row_deviation: float
    negativity: float
    column_sums: np.ndarray
    # per column: max(b_l - sum, 0, sum - b_u)
    bound_violations: np.ndarray
    tol: float

    @property
    def max_violation(self) -> float:
        bound = float(self.bound_violations.max()) if self.bound_violations.size else 0.0
        return max(self.row_deviation, self.negativity, bound)

    @property
    def feasible(self) -> bool:
        return self.max_violation <= self.tol

    def __bool__(self):
        return self.feasible


def _check_shape(F: np.ndarray, omega: DualBoundedSet) -> None:
    if F.shape != omega.shape:
        raise ValueError(f"plan has shape {F.shape}, constraint set expects {omega.shape}")


def check_feasible(F, omega: DualBoundedSet, tol: float = DEFAULT_FEAS_TOL) -> FeasibilityReport:
    F = np.asarray(F, dtype=np.float64)
    _check_shape(F, omega)
    row_dev = float(np.max(np.abs(F.sum(axis=1) - 1.0)))
    neg = float(max(0.0, -F.min()))
    colsums = F.sum(axis=0)
    viol = np.maximum(np.maximum(omega.b_l - colsums, colsums - omega.b_u), 0.0)
    return FeasibilityReport(row_dev, neg, colsums, viol, tol)


def project_simplex_sort(V) -> np.ndarray:
    """Exact row-wise projection onto the unit simplex by sorting.

    Works on a vector or on every row of a matrix.
    """
    V = np.asarray(V, dtype=np.float64)
    squeeze = V.ndim == 1
    V2 = np.atleast_2d(V)
    U = -np.sort(-V2, axis=1)
    css = np.cumsum(U, axis=1) - 1.0
    ind = np.arange(1, V2.shape[1] + 1)
    rho = np.count_nonzero(U - css / ind > 0, axis=1)
    theta = css[np.arange(V2.shape[0]), rho - 1] / rho
    W = np.maximum(V2 - theta[:, None], 0.0)
    return W[0] if squeeze else W


def _newton_shift(V0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Newton iteration on ``sum((v0 - lam)_+) - 1`` for each row.

    Returns the shifts and a mask of rows that met the tolerance.
    """
    lam = np.zeros(V0.shape[0])
    done = np.zeros(V0.shape[0], dtype=bool)
    for _ in range(NEWTON_MAX_ITER):
        V1 = V0 - lam[:, None]
        pos = V1 > 0
        f = np.where(pos, V1, 0.0).sum(axis=1) - 1.0
        done = np.abs(f) <= NEWTON_TOL
        if done.all():
            break
        npos = pos.sum(axis=1)
        step = np.divide(f, npos, out=np.zeros_like(f), where=npos > 0)
        lam = np.where(done, lam, lam + step)
    return lam, done


def project_row_simplex(V) -> np.ndarray:
    """Project a vector (or each row of a matrix) onto the unit simplex.

    The shift is found by Newton's method on the monotone piecewise-linear
    function ``l(eta) = sum((v + eta)_+) - 1``, warm-started at the mean
    shift ``eta = (1 - sum v)/c``. Rows where Newton stalls fall back to the
    sort-based projection.
    """
    V = np.asarray(V, dtype=np.float64)
    squeeze = V.ndim == 1
    V2 = np.atleast_2d(V)
    c = V2.shape[1]
    V0 = V2 + ((1.0 - V2.sum(axis=1)) / c)[:, None]
    W = V0.copy()
    # rows already nonnegative after the mean shift are on the simplex
    need = V0.min(axis=1) < 0
    if need.any():
        sub = V0[need]
        lam, ok = _newton_shift(sub)
        Wsub = np.maximum(sub - lam[:, None], 0.0)
        if not ok.all():
            logger.debug("simplex Newton stalled on %d rows, using sort fallback", (~ok).sum())
            Wsub[~ok] = project_simplex_sort(sub[~ok])
        W[need] = Wsub
    return W[0] if squeeze else W


def project_col_lower(q, b_l: float) -> np.ndarray:
    """Project onto ``{x : sum(x) >= b_l}``. Columns of a matrix are handled independently."""
    q = np.asarray(q, dtype=np.float64)
    s = q.sum(axis=0)
    shift = np.maximum(b_l - s, 0.0) / q.shape[0]
    return q + shift


def project_col_upper(q, b_u: float) -> np.ndarray:
    """Project onto ``{x : sum(x) <= b_u}``. Columns of a matrix are handled independently."""
    q = np.asarray(q, dtype=np.float64)
    s = q.sum(axis=0)
    shift = np.maximum(s - b_u, 0.0) / q.shape[0]
    return q - shift


@dataclass(frozen=True)
class ProjectionResult:
    plan: np.ndarray
    iterations: int
    converged: bool


def dykstra(
    M,
    omega: DualBoundedSet,
    tol: float = DEFAULT_DYKSTRA_TOL,
    max_iter: int = DEFAULT_DYKSTRA_MAX_ITER,
) -> ProjectionResult:
    """Dykstra's alternating projection onto the dual-bounded set.

    One sweep projects onto the row simplex, then the column lower bounds,
    then the column upper bounds, each with its own correction term. The loop
    stops once a sweep moves both the plan and every correction term by less
    than ``tol`` (Frobenius) and the returned plan meets the column bounds
    within ``tol``.

    The row-simplex projection is applied last on exit, so the returned plan
    always has exact unit row sums and no negative entries; the column sums
    carry whatever residual the loop left.
    """
    X = np.array(M, dtype=np.float64, copy=True)
    _check_shape(X, omega)
    z1 = np.zeros_like(X)
    z2 = np.zeros_like(X)
    z3 = np.zeros_like(X)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        prev = (X, z1, z2, z3)
        Y = X + z1
        X = project_row_simplex(Y)
        z1 = Y - X
        Y = X + z2
        X = project_col_lower(Y, omega.b_l)
        z2 = Y - X
        Y = X + z3
        X = project_col_upper(Y, omega.b_u)
        z3 = Y - X
        # the plan can stall for a sweep while the corrections still move
        change = max(np.linalg.norm(a - b) for a, b in zip((X, z1, z2, z3), prev))
        if change < tol and _column_excess(project_row_simplex(X), omega) <= tol:
            converged = True
            break
    # the last half-space step may leave tiny negatives or row drift
    X = project_row_simplex(X)
    return ProjectionResult(X, it, converged)


def _column_excess(X: np.ndarray, omega: DualBoundedSet) -> float:
    s = X.sum(axis=0)
    return float(max(0.0, np.max(omega.b_l - s), np.max(s - omega.b_u)))


def dykstra_project(
    M,
    omega: DualBoundedSet,
    tol: float = DEFAULT_DYKSTRA_TOL,
    max_iter: int = DEFAULT_DYKSTRA_MAX_ITER,
) -> np.ndarray:
    """Euclidean projection of ``M`` onto ``omega``.

    Warns with :class:`ApproximateProjectionWarning` when ``max_iter`` is
    reached first; the last iterate is returned either way.
    """
    res = dykstra(M, omega, tol=tol, max_iter=max_iter)
    if not res.converged:
        warnings.warn(
            f"Dykstra projection stopped after {res.iterations} sweeps without reaching tol={tol:g}",
            ApproximateProjectionWarning,
            stacklevel=2,
        )
    return res.plan
