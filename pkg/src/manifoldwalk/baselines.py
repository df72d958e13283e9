"""Conventional distances between two point clouds, used as comparison
points for the walk-matrix distance.

All five return 0 for identical inputs and are symmetric in their
arguments. ``rbf``, ``procrustes`` and ``wasserstein`` follow the usual
textbook readings (kernel two-sample statistic, orthogonal Procrustes
disparity, 1-D Wasserstein on the flattened values).
"""

from __future__ import annotations

import enum

import numpy as np
from scipy.spatial import procrustes
from scipy.spatial.distance import cdist

from .datasets import as_cloud
from .errors import DimensionMismatch, InvalidArgument


class MeasureKind(str, enum.Enum):
    COSINE = "cosine"
    RBF = "rbf"
    PROCRUSTES = "procrustes"
    WASSERSTEIN = "wasserstein"
    HAUSDORFF = "hausdorff"


def _same_shape(X1, X2):
    X1, X2 = as_cloud(X1), as_cloud(X2)
    if X1.shape != X2.shape:
        raise DimensionMismatch("cloud shapes differ", X1.shape, X2.shape)
    return X1, X2


def cosine_distance(X1, X2) -> float:
    """``1 - cos`` of the angle between the row-major flattened clouds."""
    X1, X2 = _same_shape(X1, X2)
    a, b = X1.ravel(), X2.ravel()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise InvalidArgument("cosine distance is undefined for an all-zero cloud")
    if np.array_equal(a, b):
        return 0.0
    return float(1.0 - np.dot(a, b) / (na * nb))


def default_gamma(X1, X2) -> float:
    """``1 / (d * Var(X1 u X2))``."""
    union = np.vstack([X1, X2])
    # sorted so the result does not depend on argument order
    var = np.sort(union, axis=None).var()
    return 1.0 / (union.shape[1] * var) if var > 0 else 1.0


def rbf_distance(X1, X2, gamma: float | None = None) -> float:
    """Squared kernel mean discrepancy with ``k(a, b) = exp(-gamma |a - b|^2)``."""
    X1, X2 = as_cloud(X1), as_cloud(X2)
    if X1.shape[1] != X2.shape[1]:
        raise DimensionMismatch("feature dimensions differ", X1.shape[1], X2.shape[1])
    if gamma is None:
        gamma = default_gamma(X1, X2)
    if gamma <= 0:
        raise InvalidArgument(f"gamma must be positive, got {gamma}")

    def mean_kernel(P, Q):
        return np.exp(-gamma * cdist(P, Q, "sqeuclidean")).mean()

    # both cross orders, so swapping the arguments gives a bit-identical result
    cross = mean_kernel(X1, X2) + mean_kernel(X2, X1)
    value = mean_kernel(X1, X1) + mean_kernel(X2, X2) - cross
    return float(max(value, 0.0))


def procrustes_disparity(X1, X2) -> float:
    """Residual sum of squares after optimal translation, scaling and
    orthogonal transform, with both clouds centred and scaled to unit norm."""
    X1, X2 = _same_shape(X1, X2)
    for name, X in (("X1", X1), ("X2", X2)):
        if np.all(X == X[0]):
            raise InvalidArgument(f"{name} is degenerate: all rows identical")
    if np.array_equal(X1, X2):
        return 0.0
    # scipy's disparity is not exactly symmetric in floating point
    return float(0.5 * (procrustes(X1, X2)[2] + procrustes(X2, X1)[2]))


def wasserstein_distance(X1, X2) -> float:
    """1-D Wasserstein-1 between the multisets of all entries."""
    a = np.sort(np.asarray(X1, dtype=float).ravel())
    b = np.sort(np.asarray(X2, dtype=float).ravel())
    if a.size != b.size:
        raise DimensionMismatch("entry counts differ", a.size, b.size)
    if a.size == 0:
        raise InvalidArgument("empty input")
    return float(np.abs(a - b).mean())


def hausdorff_distance(X1, X2) -> float:
    """Symmetric Hausdorff distance under the Euclidean metric."""
    X1, X2 = as_cloud(X1), as_cloud(X2)
    if X1.shape[1] != X2.shape[1]:
        raise DimensionMismatch("feature dimensions differ", X1.shape[1], X2.shape[1])
    D = cdist(X1, X2)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


MEASURES = {
    MeasureKind.COSINE: cosine_distance,
    MeasureKind.RBF: rbf_distance,
    MeasureKind.PROCRUSTES: procrustes_disparity,
    MeasureKind.WASSERSTEIN: wasserstein_distance,
    MeasureKind.HAUSDORFF: hausdorff_distance,
}


def measure(kind, X1, X2) -> float:
    return MEASURES[MeasureKind(kind)](X1, X2)
