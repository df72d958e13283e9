import math

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from manifoldwalk import baselines as b
from manifoldwalk.errors import DimensionMismatch, InvalidArgument

ALL = list(b.MeasureKind)


class TestCosine:
    def test_antipodal(self):
        X = np.array([[1.0, 2.0], [3.0, -1.0]])
        assert abs(b.cosine_distance(X, -X) - 2.0) < 1e-12

    def test_scalar_loop_oracle(self):
        rng = np.random.default_rng(0)
        X1, X2 = rng.normal(size=(7, 3)), rng.normal(size=(7, 3))
        dot = n1 = n2 = 0.0
        for i in range(7):
            for j in range(3):
                dot += X1[i, j] * X2[i, j]
                n1 += X1[i, j] ** 2
                n2 += X2[i, j] ** 2
        assert abs(b.cosine_distance(X1, X2) - (1 - dot / math.sqrt(n1 * n2))) < 1e-12

    def test_zero_norm(self):
        with pytest.raises(InvalidArgument):
            b.cosine_distance(np.zeros((2, 2)), np.ones((2, 2)))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            b.cosine_distance(np.ones((2, 2)), np.ones((3, 2)))


class TestRbf:
    def test_point_masses(self):
        d = b.rbf_distance([[0.0]], [[1.0]], gamma=1.0)
        assert abs(d - (2 - 2 * math.exp(-1))) < 1e-12
        assert abs(d - 1.264241) < 1e-6

    def test_small_gamma(self):
        rng = np.random.default_rng(1)
        assert b.rbf_distance(rng.normal(size=(10, 2)), rng.normal(size=(10, 2)), gamma=1e-12) < 1e-10

    def test_bad_gamma(self):
        with pytest.raises(InvalidArgument):
            b.rbf_distance([[0.0]], [[1.0]], gamma=0.0)


class TestProcrustes:
    def test_rotation_invariant(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(20, 2))
        th = 0.7
        R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        assert b.procrustes_disparity(X, 3 * X @ R + 5) < 1e-9

    def test_grid_search_oracle(self):
        rng = np.random.default_rng(3)
        X1, X2 = rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
        A = X1 - X1.mean(0)
        A /= np.linalg.norm(A)
        B = X2 - X2.mean(0)
        B /= np.linalg.norm(B)
        best = 1.0
        for reflect in (1.0, -1.0):
            for deg in np.arange(0, 360, 0.1):
                th = math.radians(deg)
                R = np.array([[math.cos(th), -math.sin(th)], [reflect * math.sin(th), reflect * math.cos(th)]])
                best = min(best, 1 - np.sum(A * (B @ R)) ** 2)
        assert abs(b.procrustes_disparity(X1, X2) - best) < 1e-4

    def test_degenerate(self):
        with pytest.raises(InvalidArgument):
            b.procrustes_disparity(np.ones((4, 2)), np.arange(8.0).reshape(4, 2))


class TestWasserstein:
    def test_shift(self):
        assert b.wasserstein_distance([[0.0], [1.0]], [[1.0], [2.0]]) == 1.0

    def test_assignment_oracle(self):
        rng = np.random.default_rng(4)
        a, c = rng.normal(size=100), rng.normal(1, 2, size=100)
        cost = np.abs(a[:, None] - c[None, :])
        r, col = linear_sum_assignment(cost)
        assert abs(b.wasserstein_distance(a[:, None], c[:, None]) - cost[r, col].mean()) < 1e-12

    def test_size_mismatch(self):
        with pytest.raises(DimensionMismatch):
            b.wasserstein_distance(np.ones((2, 2)), np.ones((3, 2)))


class TestHausdorff:
    def test_points(self):
        assert b.hausdorff_distance([[0.0]], [[3.0]]) == 3.0

    def test_double_loop_oracle(self):
        rng = np.random.default_rng(5)
        X1, X2 = rng.normal(size=(50, 3)), rng.normal(size=(50, 3))
        h1 = max(min(math.dist(p, q) for q in X2) for p in X1)
        h2 = max(min(math.dist(p, q) for p in X1) for q in X2)
        assert abs(b.hausdorff_distance(X1, X2) - max(h1, h2)) < 1e-12

    def test_empty(self):
        with pytest.raises(InvalidArgument):
            b.hausdorff_distance(np.zeros((0, 2)), np.zeros((1, 2)))


@pytest.mark.parametrize("kind", ALL)
def test_zero_and_symmetric(kind):
    rng = np.random.default_rng(6)
    for _ in range(50):
        n, d = int(rng.integers(3, 30)), int(rng.integers(1, 4))
        X1, X2 = rng.normal(size=(n, d)), rng.normal(size=(n, d))
        assert b.measure(kind, X1, X1.copy()) == 0.0
        assert b.measure(kind, X1, X2) == b.measure(kind, X2, X1)
