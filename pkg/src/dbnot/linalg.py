"""Dense/sparse kernels shared by the solver modules.

Dense matrices are plain ``float64`` numpy arrays. Affinity graphs are held in
:class:`SparseAffinity`, a thin immutable wrapper around a CSR matrix that
enforces symmetry, nonnegativity and a zero diagonal.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

SYMMETRY_TOL = 1e-12


class SparseAffinity:
    """Symmetric nonnegative similarity matrix in row-compressed form.

    Asymmetric input is symmetrized by keeping ``max(s_ij, s_ji)`` on both
    sides. Diagonal entries are dropped and explicit zeros are pruned.

    Parameters
    ----------
    matrix : array-like or scipy sparse matrix, shape (n, n)
        Raw similarities. Must be finite and nonnegative.
    """

    __slots__ = ("_csr",)

    def __init__(self, matrix):
        if sp.issparse(matrix):
            m = sp.csr_matrix(matrix, dtype=np.float64, copy=True)
        else:
            arr = np.asarray(matrix, dtype=np.float64)
            if arr.ndim != 2:
                raise ValueError("affinity must be a 2-D matrix")
            m = sp.csr_matrix(arr)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"affinity must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m.data)):
            raise ValueError("affinity contains non-finite values")
        if np.any(m.data < 0):
            raise ValueError("affinity values must be nonnegative")
        m = m.maximum(m.T).tocsr()
        m.setdiag(0.0)
        m.eliminate_zeros()
        m.sum_duplicates()
        m.sort_indices()
        m.data.setflags(write=False)
        m.indices.setflags(write=False)
        m.indptr.setflags(write=False)
        self._csr = m

    @classmethod
    def from_edges(cls, n, rows, cols, weights):
        """Build from an edge list; each edge is mirrored automatically."""
        coo = sp.coo_matrix(
            (np.asarray(weights, dtype=np.float64), (np.asarray(rows), np.asarray(cols))),
            shape=(n, n),
        )
        return cls(coo)

    @property
    def n(self) -> int:
        return self._csr.shape[0]

    @property
    def nnz(self) -> int:
        return self._csr.nnz

    @property
    def indptr(self) -> np.ndarray:
        return self._csr.indptr

    @property
    def indices(self) -> np.ndarray:
        return self._csr.indices

    @property
    def data(self) -> np.ndarray:
        return self._csr.data

    @property
    def csr(self) -> sp.csr_matrix:
        """Read-only view of the underlying CSR matrix."""
        return self._csr

    def degrees(self) -> np.ndarray:
        return np.asarray(self._csr.sum(axis=1)).ravel()

    def total_weight(self) -> float:
        """``1^T S 1``: every undirected edge counted twice."""
        return float(self._csr.data.sum())

    def toarray(self) -> np.ndarray:
        return self._csr.toarray()

    def __repr__(self):
        return f"SparseAffinity(n={self.n}, nnz={self.nnz})"


def _as_dense(x, name="X") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={arr.ndim}")
    return arr


def _as_csr(s):
    return s.csr if isinstance(s, SparseAffinity) else sp.csr_matrix(s)


def spmm(S, X) -> np.ndarray:
    """Sparse-dense product ``S @ X`` (rows accumulated sequentially)."""
    X = _as_dense(X)
    csr = _as_csr(S)
    if csr.shape[1] != X.shape[0]:
        raise ValueError(f"dimension mismatch: S is {csr.shape}, X is {X.shape}")
    return np.asarray(csr @ X)


def frobenius_norm(S) -> float:
    return float(np.sqrt(np.sum(_as_csr(S).data ** 2)))


def trace_quadratic(A, S, B) -> float:
    """``tr(A^T S B)`` evaluated as ``sum((S @ B) * A)``."""
    A = _as_dense(A, "A")
    B = _as_dense(B, "B")
    if A.shape != B.shape:
        raise ValueError(f"A and B must share a shape, got {A.shape} and {B.shape}")
    return float(np.sum(spmm(S, B) * A))
