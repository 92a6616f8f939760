"""Entropy-regularized linear minimization over the dual-bounded set.

Solves ``min <G, P> - delta * entropy(P)`` over plans with unit row sums and
column sums in ``[b_l, b_u]`` by alternating three diagonal scalings:

    u <- 1 / (K (v * w))                      unit row sums
    v <- max(b_l / ((K^T u) * w), 1)          lift columns below b_l
    w <- min(b_u / ((K^T u) * v), 1)          cap columns above b_u

with ``K = exp(-G / delta)``. The plan is ``diag(u) K diag(v * w)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .constraints import DualBoundedSet

logger = logging.getLogger(__name__)

DEFAULT_DELTA_SCALE = 0.05
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 5000


class KernelUnderflowError(FloatingPointError):
    """The scaled kernel lost a column to underflow, so the bounds cannot be met."""


@dataclass
class ScalingState:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    kernel: np.ndarray
    iterations: int = 0
    converged: bool = False

    def plan(self) -> np.ndarray:
        P = self.u[:, None] * self.kernel * (self.v * self.w)[None, :]
        # renormalize rows so the unit-row-sum identity holds to machine precision
        return P / P.sum(axis=1, keepdims=True)


def default_delta(grad, scale: float = DEFAULT_DELTA_SCALE) -> float:
    grad = np.asarray(grad)
    return scale * (float(grad.max() - grad.min()) + 1e-12)


def shifted_kernel(grad: np.ndarray, delta: float) -> np.ndarray:
    """``exp(-(G_i - min_j G_ij) / delta)`` row by row; every row keeps an entry equal to 1."""
    G = grad - grad.min(axis=1, keepdims=True)
    return np.exp(-G / delta)


def scale(
    grad,
    omega: DualBoundedSet,
    delta: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ScalingState:
    """Run the three-vector scaling loop and return its final state."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    G = np.asarray(grad, dtype=np.float64)
    if G.shape != omega.shape:
        raise ValueError(f"gradient has shape {G.shape}, constraint set expects {omega.shape}")
    if not np.all(np.isfinite(G)):
        raise ValueError("gradient contains non-finite values")
    K = shifted_kernel(G, delta)
    n, c = G.shape
    u = np.ones(n)
    v = np.ones(c)
    w = np.ones(c)
    converged = False
    k = 0
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for k in range(1, max_iter + 1):
            u_new = 1.0 / (K @ (v * w))
            col = K.T @ u_new
            if omega.b_l > 0:
                v_new = np.maximum(omega.b_l / (col * w), 1.0)
            else:
                v_new = v
            w_new = np.minimum(omega.b_u / (col * v_new), 1.0)
            if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new)) and np.all(w_new > 0)):
                raise KernelUnderflowError(
                    f"kernel underflow at delta={delta:g} (row shift already applied): a column vanished "
                    "after exp(-grad/delta); increase delta, i.e. use a smaller 1/delta"
                )
            change = max(
                np.max(np.abs(u_new - u) / u_new),
                np.max(np.abs(v_new - v) / v_new),
                np.max(np.abs(w_new - w) / w_new),
            )
            u, v, w = u_new, v_new, w_new
            if change < tol:
                converged = True
                break
    if not converged:
        logger.debug("entropic scaling hit max_iter=%d (delta=%g)", max_iter, delta)
    return ScalingState(u, v, w, K, k, converged)


def feasible_gradient_entropic(
    grad,
    omega: DualBoundedSet,
    delta: float | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> np.ndarray:
    """Entropic approximation of ``argmin_{P in omega} <grad, P>``.

    ``delta=None`` picks ``0.05 * (max(grad) - min(grad))``.
    """
    if delta is None:
        delta = default_delta(grad)
    return scale(grad, omega, delta, tol=tol, max_iter=max_iter).plan()
