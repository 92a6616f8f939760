"""Plan-to-label conversion and external clustering metrics (ACC, NMI, ARI)."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment


def labels_from_plan(F) -> np.ndarray:
    """Row-wise argmax; ties go to the lowest column."""
    return np.asarray(F).argmax(axis=1)


def _pair(pred, truth) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape != truth.shape:
        raise ValueError(f"label vectors differ in length: {pred.size} vs {truth.size}")
    return pred, truth


def contingency(pred, truth) -> np.ndarray:
    """Counts ``C[i, j]`` of samples in predicted cluster i and true class j."""
    pred, truth = _pair(pred, truth)
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    C = np.zeros((pi.max(initial=-1) + 1, ti.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(C, (pi, ti), 1)
    return C


def accuracy(pred, truth) -> float:
    """Fraction matched under the best one-to-one cluster-to-class map (Hungarian)."""
    pred, truth = _pair(pred, truth)
    if pred.size == 0:
        return 1.0
    C = contingency(pred, truth)
    k = max(C.shape)
    padded = np.zeros((k, k), dtype=np.int64)
    padded[: C.shape[0], : C.shape[1]] = C
    r, c = linear_sum_assignment(padded, maximize=True)
    return float(padded[r, c].sum()) / pred.size


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(pred, truth) -> float:
    """Mutual information over ``sqrt(H(pred) H(truth))``, natural log.

    Two constant labelings score 1; a constant against a non-constant one scores 0.
    """
    pred, truth = _pair(pred, truth)
    C = contingency(pred, truth).astype(np.float64)
    n = C.sum()
    hp = _entropy(C.sum(axis=1))
    ht = _entropy(C.sum(axis=0))
    if hp == 0.0 and ht == 0.0:
        return 1.0
    if hp == 0.0 or ht == 0.0:
        return 0.0
    nz = C > 0
    outer = np.outer(C.sum(axis=1), C.sum(axis=0))
    mi = float(np.sum(C[nz] / n * np.log(C[nz] * n / outer[nz])))
    return max(0.0, min(1.0, mi / np.sqrt(hp * ht)))


def _comb2(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1.0) / 2.0


def ari(pred, truth) -> float:
    """Adjusted Rand index from pair counts; 1 when the chance-corrected form is 0/0."""
    pred, truth = _pair(pred, truth)
    C = contingency(pred, truth)
    n = C.sum()
    index = _comb2(C).sum()
    a = _comb2(C.sum(axis=1)).sum()
    b = _comb2(C.sum(axis=0)).sum()
    total = _comb2(n)
    expected = a * b / total if total > 0 else 0.0
    max_index = 0.5 * (a + b)
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))


def cluster_sizes(labels, c: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise ValueError(f"labels must lie in [0, {c})")
    return np.bincount(labels, minlength=c)
