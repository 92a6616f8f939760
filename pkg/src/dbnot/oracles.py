"""Independent reference computations used to check the solver modules.

Nothing here is used on the solving path. Each oracle takes a different
route from the code it checks: generic LP/QP solves instead of closed-form
projections and scalings, enumeration instead of relaxation, brute force
instead of contingency-table formulas.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, minimize

from .constraints import DualBoundedSet


def _constraint_matrices(omega: DualBoundedSet):
    """Row-sum equalities and column-sum rows for the flattened (row-major) plan."""
    n, c = omega.shape
    A_row = np.kron(np.eye(n), np.ones((1, c)))
    A_col = np.kron(np.ones((1, n)), np.eye(c))
    return A_row, A_col


def lp_minimum(cost, omega: DualBoundedSet) -> tuple[float, np.ndarray]:
    """``min <cost, X>`` over the dual-bounded set by a generic LP solve (HiGHS)."""
    cost = np.asarray(cost, dtype=np.float64)
    A_row, A_col = _constraint_matrices(omega)
    res = linprog(
        cost.ravel(),
        A_ub=np.vstack([A_col, -A_col]),
        b_ub=np.concatenate([np.full(omega.c, omega.b_u), np.full(omega.c, -omega.b_l)]),
        A_eq=A_row,
        b_eq=np.ones(omega.n),
        bounds=(0, None),
        method="highs",
    )
    if res.status != 0:
        raise RuntimeError(f"LP oracle failed: {res.message}")
    return float(res.fun), res.x.reshape(omega.shape)


@dataclass(frozen=True)
class QPResult:
    plan: np.ndarray
    # upper bound on the Frobenius distance to the exact projection
    certified_radius: float


def _eqp(m: np.ndarray, A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``argmin ||x - m||^2`` subject to ``A x = b``."""
    if A.shape[0] == 0:
        return m.copy()
    y, *_ = np.linalg.lstsq(A @ A.T, A @ m - b, rcond=None)
    return m - A.T @ y


def qp_projection(M, omega: DualBoundedSet, active_tol: float = 1e-6) -> QPResult:
    """Euclidean projection onto the dual-bounded set by an active-set QP solve.

    A generic SQP run identifies the active constraints (zero entries and
    tight column bounds); the equality-constrained problem on that active set
    is then solved exactly. Optimality is certified by the variational
    inequality: for the candidate X, ``gap = max_Y <M - X, Y - X>`` over the
    set (an LP), and ``||X - X*|| <= sqrt(2 gap)``.
    """
    M = np.asarray(M, dtype=np.float64)
    n, c = omega.shape
    m = M.ravel()
    A_row, A_col = _constraint_matrices(omega)
    cons = [
        {"type": "eq", "fun": lambda x: A_row @ x - 1.0, "jac": lambda x: A_row},
        {"type": "ineq", "fun": lambda x: A_col @ x - omega.b_l, "jac": lambda x: A_col},
        {"type": "ineq", "fun": lambda x: omega.b_u - A_col @ x, "jac": lambda x: -A_col},
    ]
    x0 = np.full(n * c, 1.0 / c)
    res = minimize(
        lambda x: 0.5 * np.sum((x - m) ** 2),
        x0,
        jac=lambda x: x - m,
        bounds=[(0, None)] * (n * c),
        constraints=cons,
        method="SLSQP",
        options={"ftol": 1e-14, "maxiter": 500},
    )
    x = np.clip(res.x, 0.0, None)

    best = None
    for tol in (active_tol, 1e-8, 1e-4, 1e-3):
        zero = x <= tol
        cs = A_col @ x
        low = np.abs(cs - omega.b_l) <= tol
        up = np.abs(cs - omega.b_u) <= tol
        if omega.b_l == omega.b_u:
            up = up & ~low
        free = ~zero
        A = np.vstack([A_row[:, free], A_col[low][:, free], A_col[up][:, free]])
        b = np.concatenate([np.ones(n), np.full(low.sum(), omega.b_l), np.full(up.sum(), omega.b_u)])
        cand = np.zeros(n * c)
        cand[free] = _eqp(m[free], A, b)
        radius = _certify(cand, m, omega)
        if best is None or radius < best.certified_radius:
            best = QPResult(cand.reshape(n, c), radius)
        if radius < 1e-7:
            break
    return best


def _certify(x: np.ndarray, m: np.ndarray, omega: DualBoundedSet) -> float:
    A_row, A_col = _constraint_matrices(omega)
    infeas = max(
        float(np.max(np.abs(A_row @ x - 1.0))),
        float(max(0.0, -x.min())),
        float(max(0.0, np.max(omega.b_l - A_col @ x))),
        float(max(0.0, np.max(A_col @ x - omega.b_u))),
    )
    if infeas > 1e-9:
        return math.inf
    # max_Y <m - x, Y> is min_Y <x - m, Y>
    val, _ = lp_minimum((x - m).reshape(omega.shape), omega)
    gap = max(0.0, -val - float(np.dot(m - x, x)))
    return math.sqrt(2.0 * gap)


def size_feasible_assignments(n: int, c: int, b_l: float, b_u: float):
    """All hard label vectors whose cluster sizes lie in ``[b_l, b_u]``."""
    for labels in itertools.product(range(c), repeat=n):
        sizes = np.bincount(labels, minlength=c)
        if np.all(sizes >= b_l - 1e-12) and np.all(sizes <= b_u + 1e-12):
            yield np.array(labels)


def best_hard_mincut(A_dense: np.ndarray, c: int, b_l: float, b_u: float) -> tuple[float, np.ndarray]:
    """Exhaustive minimum of ``-tr(Y^T S Y)`` over size-feasible hard assignments."""
    n = A_dense.shape[0]
    best_val, best_labels = math.inf, None
    for labels in size_feasible_assignments(n, c, b_l, b_u):
        same = labels[:, None] == labels[None, :]
        val = -float(A_dense[same].sum())
        if val < best_val:
            best_val, best_labels = val, labels
    return best_val, best_labels


def simplex_projection_by_kkt(v) -> np.ndarray:
    """Simplex projection by trying every support set (exhaustive, for short vectors)."""
    v = np.asarray(v, dtype=np.float64)
    c = v.size
    order = np.argsort(-v, kind="stable")
    for k in range(1, c + 1):
        support = order[:k]
        theta = (v[support].sum() - 1.0) / k
        w = np.maximum(v - theta, 0.0)
        # valid when exactly the top-k entries stay positive
        if np.all(v[support] - theta > 0) and (k == c or v[order[k]] - theta <= 0):
            return w
    raise AssertionError("no support set satisfied the KKT conditions")


def finite_difference_gradient(f, X: np.ndarray, h: float = 1e-6) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    G = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        E = np.zeros_like(X)
        E[idx] = h
        G[idx] = (f(X + E) - f(X - E)) / (2.0 * h)
    return G


def accuracy_brute(pred, truth) -> float:
    """Best match rate over every injective relabeling of the predicted clusters."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    pk = np.unique(pred)
    tk = np.unique(truth)
    k = max(len(pk), len(tk))
    targets = list(tk) + [-(i + 1) for i in range(k - len(tk))]
    best = 0
    for perm in itertools.permutations(targets, len(pk)):
        mapping = dict(zip(pk, perm))
        best = max(best, int(sum(mapping[p] == t for p, t in zip(pred, truth))))
    return best / len(pred)


def ari_brute(pred, truth) -> float:
    """Adjusted Rand index by walking every pair of samples."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    n = len(pred)
    both = same_p = same_t = 0
    pairs = 0
    for i, j in itertools.combinations(range(n), 2):
        sp_ = pred[i] == pred[j]
        st = truth[i] == truth[j]
        same_p += sp_
        same_t += st
        both += sp_ and st
        pairs += 1
    expected = same_p * same_t / pairs
    max_index = 0.5 * (same_p + same_t)
    if max_index == expected:
        return 1.0
    return (both - expected) / (max_index - expected)


def nmi_brute(pred, truth) -> float:
    """NMI from empirical probabilities computed sample by sample."""
    pred = list(np.asarray(pred))
    truth = list(np.asarray(truth))
    n = len(pred)
    pa = {a: pred.count(a) / n for a in set(pred)}
    pb = {b: truth.count(b) / n for b in set(truth)}
    joint = {}
    for a, b in zip(pred, truth):
        joint[(a, b)] = joint.get((a, b), 0) + 1 / n
    mi = sum(p * math.log(p / (pa[a] * pb[b])) for (a, b), p in joint.items())
    ha = -sum(p * math.log(p) for p in pa.values())
    hb = -sum(p * math.log(p) for p in pb.values())
    if ha == 0 and hb == 0:
        return 1.0
    if ha == 0 or hb == 0:
        return 0.0
    return mi / math.sqrt(ha * hb)
