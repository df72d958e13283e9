"""Exact k-nearest-neighbour graphs and the spectral quantities needed to pick
a walk parameter that keeps ``I - tA`` invertible."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.spatial.distance import cdist

from .datasets import as_cloud
from .errors import ConvergenceError, InvalidArgument

SPECTRAL_TOL = 1e-10
SPECTRAL_MAX_ITER = 10_000


def pairwise_euclidean(X) -> np.ndarray:
    """Dense ``(n, n)`` Euclidean distance matrix."""
    X = as_cloud(X)
    return cdist(X, X)


@dataclass(frozen=True, eq=False)
class KnnGraph:
    """Directed k-NN graph stored as a neighbour table.

    ``neighbors[i]`` lists the ``k`` nearest other rows of node ``i`` ordered
    by (distance, index). When ``symmetrized`` is set the edge set is the
    neighbour relation closed under reversal.
    """

    n: int
    k: int
    neighbors: np.ndarray
    symmetrized: bool = False

    @property
    def edges(self) -> set[tuple[int, int]]:
        out = set()
        for i, row in enumerate(self.neighbors):
            for j in row:
                out.add((i, int(j)))
                if self.symmetrized:
                    out.add((int(j), i))
        return out


def knn_graph(X, k: int, symmetrize: bool = False) -> KnnGraph:
    """Connect every point to its ``k`` nearest other points.

    Distance ties go to the lower index, so the result never depends on a
    random seed.
    """
    D = pairwise_euclidean(X)
    n = len(D)
    if not 1 <= k <= n - 1:
        raise InvalidArgument(f"k must satisfy 1 <= k <= n-1 (k={k}, n={n})")
    np.fill_diagonal(D, np.inf)
    return KnnGraph(n=n, k=k, neighbors=k_smallest(D, k), symmetrized=symmetrize)


def k_smallest(D, k):
    """Column indices of the ``k`` smallest entries per row, ordered by
    (value, index). Equivalent to a stable full argsort, but only sorts the
    entries that can make the cut."""
    kth = np.partition(D, k - 1, axis=1)[:, k - 1:k]
    rows, cols = np.nonzero(D <= kth)
    order = np.lexsort((cols, D[rows, cols], rows))
    rows, cols = rows[order], cols[order]
    starts = np.searchsorted(rows, np.arange(len(D)))
    rank = np.arange(len(rows)) - starts[rows]
    keep = rank < k
    return cols[keep].reshape(len(D), k)


def adjacency(graph: KnnGraph) -> np.ndarray:
    """Binary adjacency matrix with ``A[i, j] = 1`` iff ``(i, j)`` is an edge."""
    A = np.zeros((graph.n, graph.n))
    if graph.neighbors.size:
        rows = np.repeat(np.arange(graph.n), graph.neighbors.shape[1])
        A[rows, graph.neighbors.ravel()] = 1.0
    if graph.symmetrized:
        A = np.maximum(A, A.T)
    return A


def knn_adjacency(X, k: int, symmetrize: bool = False) -> np.ndarray:
    return adjacency(knn_graph(X, k, symmetrize))


def _is_acyclic(A) -> bool:
    # Kahn's algorithm on the support of A; self-loops count as cycles
    S = sparse.csr_matrix(A != 0)
    if S.diagonal().any():
        return False
    indegree = np.asarray(S.sum(axis=0)).ravel()
    stack = list(np.flatnonzero(indegree == 0))
    seen = 0
    while stack:
        i = stack.pop()
        seen += 1
        for j in S.indices[S.indptr[i]:S.indptr[i + 1]]:
            indegree[j] -= 1
            if indegree[j] == 0:
                stack.append(j)
    return seen == S.shape[0]


def spectral_radius(A, tol: float = SPECTRAL_TOL, max_iter: int = SPECTRAL_MAX_ITER) -> float:
    """Largest eigenvalue magnitude of a non-negative matrix by power iteration.

    Iterates on ``A + I`` from the all-ones vector: for a non-negative matrix
    the Perron root is the only eigenvalue attaining ``rho + 1`` in modulus,
    which avoids the oscillation plain power iteration shows on bipartite
    graphs. Acyclic supports (nilpotent ``A``) return 0 directly. The
    estimate is clipped to the Gershgorin row/column-sum bounds.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgument(f"adjacency must be square, got shape {A.shape}")
    if A.shape[0] == 0 or not A.any():
        return 0.0
    if np.any(A < 0):
        raise InvalidArgument("spectral_radius expects a non-negative matrix")
    if _is_acyclic(A):
        return 0.0

    bound = min(A.sum(axis=1).max(), A.sum(axis=0).max())
    S = sparse.csr_matrix(A)
    x = np.full(A.shape[0], 1.0 / np.sqrt(A.shape[0]))
    prev = None
    est = 0.0
    for _ in range(max_iter):
        y = S @ x + x
        est = float(np.linalg.norm(y))
        x = y / est
        if prev is not None and abs(est - prev) <= tol * est:
            return float(min(max(est - 1.0, 0.0), bound))
        prev = est
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps", est - 1.0)


def max_stable_t(A1, A2, safety: float = 0.9) -> float:
    """Walk parameter ``safety / max(rho(A1), rho(A2))`` shared by both graphs."""
    if not 0.0 < safety < 1.0:
        raise InvalidArgument(f"safety must lie in (0, 1), got {safety}")
    rho = max(spectral_radius(A1), spectral_radius(A2), 1e-12)
    return safety / rho
