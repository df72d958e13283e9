"""Manifold distance between images.

Each image becomes a point cloud with one row per pixel (raster order), so
two images of equal size give node-aligned k-NN graphs.
"""

from __future__ import annotations

from ..similarity import DEFAULT_SAFETY, SimilarityResult, cloud_distance
from .raster import as_image, fit_pixel_budget, image_to_point_cloud, resize

DEFAULT_K = 8
DEFAULT_MAX_PIXELS = 2500


def common_size(a, b) -> tuple[int, int]:
    """``(w, h)`` of the smaller common dimensions."""
    a, b = as_image(a), as_image(b)
    return min(a.shape[1], b.shape[1]), min(a.shape[0], b.shape[0])


def prepare_pair(a, b, max_pixels: int | None = DEFAULT_MAX_PIXELS):
    """Resize both images to their smaller common size, then apply the pixel budget."""
    w, h = common_size(a, b)
    a = fit_pixel_budget(resize(a, w, h), max_pixels)
    b = fit_pixel_budget(resize(b, w, h), max_pixels)
    return a, b


def image_distance(a, b, k: int = DEFAULT_K, include_xy: bool = True, t: float | None = None,
                   variant="rows", symmetrize: bool = False, safety: float = DEFAULT_SAFETY,
                   max_pixels: int | None = DEFAULT_MAX_PIXELS) -> SimilarityResult:
    """Walk-matrix distance between the pixel graphs of two images.

    ``max_pixels`` bounds the dense ``n x n`` solve; ``None`` disables it.
    """
    a, b = prepare_pair(a, b, max_pixels)
    Xa = image_to_point_cloud(a, include_xy)
    Xb = image_to_point_cloud(b, include_xy)
    k = min(k, len(Xa) - 1)
    return cloud_distance(Xa, Xb, k=k, t=t, variant=variant, symmetrize=symmetrize, safety=safety)
