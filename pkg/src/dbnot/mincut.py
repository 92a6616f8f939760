"""Objective oracles: size-constrained min cut and the convex Laplacian problem."""

from __future__ import annotations

import numpy as np

from .graph import laplacian
from .linalg import SparseAffinity, frobenius_norm, spmm, trace_quadratic
from .solver import ObjectiveOracle


def _check(S, F) -> np.ndarray:
    F = np.asarray(F, dtype=np.float64)
    n = S.shape[0] if hasattr(S, "shape") else S.n
    if F.ndim != 2 or F.shape[0] != n:
        raise ValueError(f"plan shape {F.shape} does not match an affinity with n={n}")
    return F


def mincut_value(S: SparseAffinity, F) -> float:
    """``-tr(F^T S F)``."""
    F = _check(S, F)
    return -trace_quadratic(F, S, F)


def mincut_gradient(S: SparseAffinity, F) -> np.ndarray:
    F = _check(S, F)
    return -2.0 * spmm(S, F)


def segment_coefficients(S, F, P) -> tuple[float, float, float]:
    """``x = tr(F^T S F)``, ``y = tr(P^T S P)``, ``z = tr(P^T S F)``."""
    SF = spmm(S, F)
    SP = spmm(S, P)
    return float(np.sum(F * SF)), float(np.sum(P * SP)), float(np.sum(P * SF))


def line_search_mincut(S: SparseAffinity, F, P) -> float:
    """Exact minimizer of ``-tr(G^T S G)`` over ``G = (1-mu) F + mu P``, ``mu in [0, 1]``.

    With ``alpha = 1 - mu`` the trace is ``a alpha^2 + 2 alpha (z - y) + y``
    where ``a = x + y - 2z``; it is maximized over ``alpha`` in closed form.
    """
    F = _check(S, F)
    P = _check(S, P)
    x, y, z = segment_coefficients(S, F, P)
    a = x + y - 2.0 * z
    scale = abs(x) + abs(y) + abs(z)
    if abs(a) <= 1e-14 * scale or scale == 0.0:
        # linear along the segment: move only if P is strictly better
        return 1.0 if y > z else 0.0
    r = (y - z) / a
    if a < 0:
        if r >= 1.0:
            return 0.0
        if r <= 0.0:
            return 1.0
        return 1.0 - r
    # convex in alpha: the larger endpoint wins (trace x at F, y at P), ties go to P
    return 1.0 if y >= x else 0.0


class MinCutOracle(ObjectiveOracle):
    """``H(F) = -tr(F^T S F)`` with smoothness constant ``2 ||S||_F``."""

    def __init__(self, S: SparseAffinity):
        self.S = S
        self.smoothness = 2.0 * frobenius_norm(S)

    def value(self, F) -> float:
        return mincut_value(self.S, F)

    def gradient(self, F) -> np.ndarray:
        return mincut_gradient(self.S, F)

    def line_search(self, F, P) -> float:
        return line_search_mincut(self.S, F, P)


def convex_value(lap, F) -> float:
    """``tr(F^T Lap F)``."""
    F = _check(lap, F)
    return trace_quadratic(F, lap, F)


class ConvexLaplacianOracle(ObjectiveOracle):
    """``H(F) = tr(F^T Lap F)`` for a graph Laplacian ``Lap = D - S``.

    Over the row simplex its minimum 0 is attained by the uniform plan.
    """

    def __init__(self, S: SparseAffinity):
        self.lap = laplacian(S)
        self.smoothness = 2.0 * frobenius_norm(self.lap)

    def value(self, F) -> float:
        return convex_value(self.lap, F)

    def gradient(self, F) -> np.ndarray:
        F = _check(self.lap, F)
        return 2.0 * spmm(self.lap, F)

    def line_search(self, F, P) -> float:
        F = _check(self.lap, F)
        d = np.asarray(P, dtype=np.float64) - F
        curv = trace_quadratic(d, self.lap, d)
        slope = trace_quadratic(d, self.lap, F)
        if curv <= 0.0:
            return 1.0 if slope < 0 else 0.0
        return float(np.clip(-slope / curv, 0.0, 1.0))
