"""Random-walk matrices ``W = (I - tA)^-1`` and the distances built on them.

Two graphs are compared by the Frobenius norm of the difference of their
walk matrices. The comparison is only meaningful when node ``i`` of one graph
corresponds to node ``i`` of the other (generation order for synthetic
pairs, raster order for images); no alignment is attempted here.

The same matrices double as per-node embeddings: node ``i`` is represented
by row ``i`` of ``W`` (walks leaving ``i``), by column ``i`` (walks arriving
at ``i``), or by both concatenated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InstabilityError, InvalidArgument
from .graphs import knn_adjacency, spectral_radius

STABILITY_MARGIN = 1e-9
DEFAULT_SAFETY = 0.9


class Variant(str, enum.Enum):
    ROWS = "rows"
    COLUMNS = "columns"
    ROWS_AND_COLUMNS = "rows_and_columns"

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, cls):
            return value
        aliases = {"both": cls.ROWS_AND_COLUMNS, "cols": cls.COLUMNS}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            choices = ", ".join(v.value for v in cls)
            raise InvalidArgument(f"unknown variant {value!r}; choose from {choices}, both") from None


@dataclass(frozen=True, eq=False)
class WalkMatrix:
    W: np.ndarray
    t: float
    adjacency: np.ndarray

    @property
    def n(self) -> int:
        return len(self.W)

    def residual(self) -> float:
        """Frobenius norm of ``(I - tA) W - I``."""
        n = self.n
        return float(np.linalg.norm((np.eye(n) - self.t * self.adjacency) @ self.W - np.eye(n)))


@dataclass(frozen=True)
class SimilarityResult:
    distance: float
    t: float
    n: int
    variant: Variant

    @property
    def score(self) -> float:
        """``1 / (1 + d/n)``: a bounded convenience score, 1 for identical graphs.

        This normalisation is a convention of this package, not a calibrated
        percentage.
        """
        return similarity_score(self.distance, self.n)


def similarity_score(distance: float, n: int) -> float:
    return 1.0 / (1.0 + distance / n)


def walk_matrix(A, t: float, rho: float | None = None) -> WalkMatrix:
    """Solve ``(I - tA) W = I``.

    Raises :class:`InstabilityError` when ``t * rho(A)`` is not safely below
    one; pass ``rho`` if it is already known to skip the power iteration.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgument(f"adjacency must be square, got shape {A.shape}")
    if not np.isfinite(t) or t < 0:
        raise InvalidArgument(f"walk parameter t must be a finite non-negative number, got {t}")
    if rho is None:
        rho = spectral_radius(A)
    if t * rho >= 1.0 - STABILITY_MARGIN:
        raise InstabilityError(
            f"t={t:.6g} with spectral radius {rho:.6g} gives t*rho={t * rho:.6g} >= 1; "
            f"use t < {1.0 / rho:.6g} (e.g. the automatic choice)"
        )
    n = len(A)
    identity = np.eye(n)
    try:
        W = np.linalg.solve(identity - t * A, identity)
    except np.linalg.LinAlgError as exc:
        raise InstabilityError(f"I - tA is singular for t={t:.6g}; use a smaller t") from exc
    if not np.all(np.isfinite(W)):
        raise InstabilityError(f"walk matrix overflowed for t={t:.6g}; use a smaller t")
    return WalkMatrix(W=W, t=float(t), adjacency=A)


def view(walk: WalkMatrix, variant="rows") -> np.ndarray:
    """Per-node embedding matrix: ``W``, ``W.T`` or ``[W | W.T]``."""
    variant = Variant.parse(variant)
    W = walk.W if isinstance(walk, WalkMatrix) else np.asarray(walk)
    if variant is Variant.ROWS:
        return W
    if variant is Variant.COLUMNS:
        return W.T
    return np.hstack([W, W.T])


def _frobenius(M) -> float:
    # memory-order ravel: a transposed view sums its squares in the same order
    flat = np.ravel(M, order="K")
    return float(np.sqrt(np.dot(flat, flat)))


def manifold_distance(A1, A2, t: float | None = None, variant="rows",
                      safety: float = DEFAULT_SAFETY) -> SimilarityResult:
    """Frobenius distance between the walk matrices of two aligned graphs.

    ``t=None`` picks ``max_stable_t(A1, A2, safety)`` so both systems are
    well conditioned.
    """
    A1 = np.asarray(A1, dtype=float)
    A2 = np.asarray(A2, dtype=float)
    if A1.shape != A2.shape:
        raise DimensionMismatch("adjacency sizes differ", A1.shape[0], A2.shape[0])
    variant = Variant.parse(variant)
    rho1, rho2 = spectral_radius(A1), spectral_radius(A2)
    if t is None:
        if not 0.0 < safety < 1.0:
            raise InvalidArgument(f"safety must lie in (0, 1), got {safety}")
        t = safety / max(rho1, rho2, 1e-12)
    W1 = walk_matrix(A1, t, rho=rho1)
    W2 = walk_matrix(A2, t, rho=rho2)
    if variant is Variant.ROWS_AND_COLUMNS:
        diff = view(W1, variant) - view(W2, variant)
    else:
        diff = view(W1.W - W2.W, variant)
    return SimilarityResult(distance=_frobenius(diff), t=float(t), n=len(A1), variant=variant)


def cloud_distance(X1, X2, k: int = 10, t: float | None = None, variant="rows",
                   symmetrize: bool = False, safety: float = DEFAULT_SAFETY) -> SimilarityResult:
    """Build a k-NN graph on each (row-aligned) cloud and compare them."""
    X1 = np.asarray(X1, dtype=float)
    X2 = np.asarray(X2, dtype=float)
    if X1.shape[0] != X2.shape[0]:
        raise DimensionMismatch("point counts differ", X1.shape[0], X2.shape[0])
    A1 = knn_adjacency(X1, k, symmetrize)
    A2 = knn_adjacency(X2, k, symmetrize)
    return manifold_distance(A1, A2, t=t, variant=variant, safety=safety)


def point_distance(walk: WalkMatrix, i: int, j: int, variant="rows") -> float:
    """Euclidean distance between the embeddings of nodes ``i`` and ``j``."""
    n = walk.n
    for idx in (i, j):
        if not 0 <= idx < n:
            raise IndexError(f"node index {idx} out of range for {n} nodes")
    E = view(walk, variant)
    return float(np.linalg.norm(E[i] - E[j]))


def embedding_distances(E, rows, cols) -> np.ndarray:
    """Distances between embedding rows ``E[rows]`` and ``E[cols]``.

    Uses the Gram expansion for speed; squared distances are clipped at zero
    before the square root.
    """
    P = E[rows]
    Q = E[cols]
    sq = (P * P).sum(axis=1)[:, None] + (Q * Q).sum(axis=1)[None, :] - 2.0 * (P @ Q.T)
    return np.sqrt(np.maximum(sq, 0.0))


__all__ = [
    "Variant",
    "WalkMatrix",
    "SimilarityResult",
    "walk_matrix",
    "view",
    "manifold_distance",
    "cloud_distance",
    "point_distance",
    "embedding_distances",
    "similarity_score",
]
