"""Data ingestion, feature scaling, affinity graphs, synthetic data and initial plans."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import pdist, squareform

from .constraints import DualBoundedSet, dykstra_project
from .linalg import SparseAffinity

SIGMA_SUBSAMPLE_ABOVE = 2000
SIGMA_SUBSAMPLE_PAIRS = 1_000_000


@dataclass(frozen=True)
class LabeledDataset:
    """Samples are the columns of ``features`` (shape ``(d, n)``)."""

    features: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        Z = np.asarray(self.features, dtype=np.float64)
        if Z.ndim != 2:
            raise ValueError("features must be a (d, n) matrix")
        if Z.shape[1] < 2:
            raise ValueError("need at least two samples")
        if not np.all(np.isfinite(Z)):
            raise ValueError("features contain non-finite values")
        object.__setattr__(self, "features", Z)
        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.shape != (Z.shape[1],):
                raise ValueError(f"expected {Z.shape[1]} labels, got shape {y.shape}")
            if y.size and y.min() < 0:
                raise ValueError("labels must be nonnegative integers")
            object.__setattr__(self, "labels", y.astype(np.int64))

    @property
    def n(self) -> int:
        return self.features.shape[1]

    @property
    def d(self) -> int:
        return self.features.shape[0]


def read_csv(path) -> LabeledDataset:
    """Read one sample per line; a final column headed ``label`` holds integer classes.

    A header line is optional. Without a header every column is a feature.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    header = None
    try:
        [float(x) for x in rows[0]]
    except ValueError:
        header = [h.strip() for h in rows[0]]
        rows = rows[1:]
    data = np.array([[float(x) for x in r] for r in rows], dtype=np.float64)
    labels = None
    if header is not None and header[-1].lower() == "label":
        labels = data[:, -1]
        if not np.all(labels == np.round(labels)):
            raise ValueError(f"{path}: label column must hold integers")
        labels = labels.astype(np.int64)
        data = data[:, :-1]
    return LabeledDataset(data.T, labels)


def write_csv(dataset: LabeledDataset, path) -> None:
    path = Path(path)
    d = dataset.d
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        header = [f"x{i}" for i in range(d)]
        if dataset.labels is not None:
            header.append("label")
        w.writerow(header)
        for i in range(dataset.n):
            row = [repr(float(v)) for v in dataset.features[:, i]]
            if dataset.labels is not None:
                row.append(str(int(dataset.labels[i])))
            w.writerow(row)


def normalize_features(Z) -> np.ndarray:
    """Zero mean and unit population variance per feature (row of ``Z``).

    Constant features are centered and left at zero variance.
    """
    Z = np.asarray(Z, dtype=np.float64)
    centered = Z - Z.mean(axis=1, keepdims=True)
    std = centered.std(axis=1, keepdims=True)
    safe = np.where(std > 0, std, 1.0)
    return centered / safe


def mean_pairwise_distance(X: np.ndarray, seed: int = 0) -> float:
    """Mean Euclidean distance over all pairs of rows of ``X``.

    Above ``SIGMA_SUBSAMPLE_ABOVE`` samples a fixed-seed subsample of pairs is used.
    """
    n = X.shape[0]
    if n <= SIGMA_SUBSAMPLE_ABOVE:
        return float(pdist(X).mean())
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, SIGMA_SUBSAMPLE_PAIRS)
    j = rng.integers(0, n - 1, SIGMA_SUBSAMPLE_PAIRS)
    j = np.where(j >= i, j + 1, j)
    return float(np.linalg.norm(X[i] - X[j], axis=1).mean())


def knn_gaussian_affinity(Z, k: int, sigma: float | None = None) -> SparseAffinity:
    """k-nearest-neighbour graph with Gaussian weights ``exp(-d^2 / (2 sigma^2))``.

    ``sigma`` defaults to the mean pairwise Euclidean distance. The graph is
    symmetrized by taking the larger of ``s_ij`` and ``s_ji``.
    """
    Z = np.asarray(Z, dtype=np.float64)
    X = Z.T
    n = X.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")
    D = squareform(pdist(X))
    if sigma is None:
        sigma = float(D[np.triu_indices(n, 1)].mean()) if n <= SIGMA_SUBSAMPLE_ABOVE else mean_pairwise_distance(X)
    if sigma <= 0:
        # every point coincides
        sigma = 1.0
    np.fill_diagonal(D, np.inf)
    # stable sort keeps neighbour choice deterministic under distance ties
    nbrs = np.argsort(D, axis=1, kind="stable")[:, :k]
    rows = np.repeat(np.arange(n), k)
    cols = nbrs.ravel()
    d2 = D[rows, cols] ** 2
    weights = np.exp(-d2 / (2.0 * sigma**2))
    # keep exact-duplicate edges (weight 1) and drop underflowed zeros
    return SparseAffinity(sp.coo_matrix((weights, (rows, cols)), shape=(n, n)))


def laplacian(S) -> sp.csr_matrix:
    """Unnormalized graph Laplacian ``D - S``."""
    csr = S.csr if isinstance(S, SparseAffinity) else sp.csr_matrix(S)
    deg = np.asarray(csr.sum(axis=1)).ravel()
    L = (sp.diags(deg) - csr).tocsr()
    L.sort_indices()
    return L


def generate_two_rings(n_per_ring: int = 100, noise: float = 0.05, seed: int = 0) -> LabeledDataset:
    """Two concentric rings of radius 1 and 2.5 with Gaussian radial noise."""
    if n_per_ring < 8:
        raise ValueError("n_per_ring must be at least 8")
    rng = np.random.default_rng(seed)
    pts = []
    labels = []
    for label, radius in enumerate((1.0, 2.5)):
        theta = rng.uniform(0.0, 2.0 * np.pi, n_per_ring)
        r = radius + noise * rng.standard_normal(n_per_ring)
        pts.append(np.stack([r * np.cos(theta), r * np.sin(theta)]))
        labels.append(np.full(n_per_ring, label))
    return LabeledDataset(np.hstack(pts), np.concatenate(labels))


def random_connected_graph(n: int, density: float = 0.5, seed=0) -> np.ndarray:
    """Dense symmetric weights: each pair is an edge with probability ``density``,
    weight uniform in ``[0, 1)``, plus a path of weight 0.1 wherever the path edge
    is missing so the graph is always connected.

    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    W = rng.random((n, n)) * (rng.random((n, n)) < density)
    W = np.triu(W, 1)
    W = W + W.T
    for i in range(n - 1):
        if W[i, i + 1] == 0:
            W[i, i + 1] = W[i + 1, i] = 0.1
    return W


def generate_blobs(n_per_blob: int, centers, std: float = 0.1, seed: int = 0) -> LabeledDataset:
    """Isotropic Gaussian blobs around ``centers`` (shape ``(k, d)``)."""
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    rng = np.random.default_rng(seed)
    pts = [ctr[:, None] + std * rng.standard_normal((centers.shape[1], n_per_blob)) for ctr in centers]
    labels = np.repeat(np.arange(len(centers)), n_per_blob)
    return LabeledDataset(np.hstack(pts), labels)


def generate_two_moons(n_per_moon: int = 100, noise: float = 0.05, seed: int = 0) -> LabeledDataset:
    """Two interleaving half circles; stands in for the unpublished toy sets."""
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.0, np.pi, n_per_moon)
    upper = np.stack([np.cos(t), np.sin(t)])
    t = rng.uniform(0.0, np.pi, n_per_moon)
    lower = np.stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    Z = np.hstack([upper, lower]) + noise * rng.standard_normal((2, 2 * n_per_moon))
    return LabeledDataset(Z, np.repeat([0, 1], n_per_moon))


def kmeans(X: np.ndarray, c: int, seed: int = 0, max_iter: int = 300, n_init: int = 10) -> np.ndarray:
    """Seeded Lloyd's algorithm with k-means++ seeding; returns labels of the rows of ``X``."""
    rng = np.random.default_rng(seed)
    n = X.shape[0]
    best_labels, best_inertia = None, np.inf
    for _ in range(n_init):
        centers = np.empty((c, X.shape[1]))
        centers[0] = X[rng.integers(n)]
        d2 = np.sum((X - centers[0]) ** 2, axis=1)
        for j in range(1, c):
            total = d2.sum()
            idx = rng.choice(n, p=d2 / total) if total > 0 else rng.integers(n)
            centers[j] = X[idx]
            d2 = np.minimum(d2, np.sum((X - centers[j]) ** 2, axis=1))
        labels = np.full(n, -1)
        for _ in range(max_iter):
            dist = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
            new = dist.argmin(axis=1)
            if np.array_equal(new, labels):
                break
            labels = new
            for j in range(c):
                members = X[labels == j]
                if len(members):
                    centers[j] = members.mean(axis=0)
        inertia = float(((X - centers[labels]) ** 2).sum())
        if inertia < best_inertia:
            best_labels, best_inertia = labels.copy(), inertia
    return best_labels


def spectral_embedding(S: SparseAffinity, c: int) -> np.ndarray:
    """Rows of the ``c`` leading eigenvectors of ``D^-1/2 S D^-1/2``, row-normalized."""
    deg = S.degrees()
    inv = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    A = (sp.diags(inv) @ S.csr @ sp.diags(inv)).toarray()
    _, vecs = np.linalg.eigh(A)
    U = vecs[:, -c:]
    norms = np.linalg.norm(U, axis=1, keepdims=True)
    return U / np.where(norms > 0, norms, 1.0)


INIT_MODES = ("uniform", "random", "kmeans", "spectral")


def soft_one_hot(labels: np.ndarray, c: int, high: float = 0.9) -> np.ndarray:
    """Rows put ``high`` on the label and spread the rest evenly."""
    F = np.full((len(labels), c), (1.0 - high) / (c - 1))
    F[np.arange(len(labels)), labels] = high
    return F


def initial_plan(
    omega: DualBoundedSet,
    mode: str = "uniform",
    Z=None,
    seed: int = 0,
    S: SparseAffinity | None = None,
    jitter: float = 0.01,
) -> np.ndarray:
    """Feasible starting plan.

    ``uniform``: ``1/c`` plus uniform noise in ``[-jitter, jitter]``.
    ``random``: rows drawn from the flat Dirichlet distribution.
    ``kmeans``: Lloyd's k-means on the samples of ``Z``, smoothed to 0.9/0.1 rows.
    ``spectral``: the same smoothing applied to k-means on the spectral embedding of ``S``.
    Every mode finishes with a projection onto ``omega``.
    """
    rng = np.random.default_rng(seed)
    if mode == "uniform":
        F = omega.uniform()
        if jitter > 0:
            F = F + rng.uniform(-jitter, jitter, size=omega.shape)
        else:
            return F
    elif mode == "random":
        F = rng.dirichlet(np.ones(omega.c), omega.n)
    elif mode == "kmeans":
        if Z is None:
            raise ValueError("kmeans initialization needs the feature matrix Z")
        Z = np.asarray(Z, dtype=np.float64)
        if Z.shape[1] != omega.n:
            raise ValueError(f"Z has {Z.shape[1]} samples, constraint set expects {omega.n}")
        F = soft_one_hot(kmeans(Z.T, omega.c, seed=seed), omega.c)
    elif mode == "spectral":
        if S is None:
            raise ValueError("spectral initialization needs the affinity S")
        F = soft_one_hot(kmeans(spectral_embedding(S, omega.c), omega.c, seed=seed), omega.c)
    else:
        raise ValueError(f"unknown init mode {mode!r}; expected one of {INIT_MODES}")
    return dykstra_project(F, omega)
