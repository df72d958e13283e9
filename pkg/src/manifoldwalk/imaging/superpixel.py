"""Superpixel-centroid images.

Segments are square grid blocks (not SLIC). Each block is painted with the
palette colour closest to its mean LAB colour, where the palette is a
k-means quantisation of all pixels of the image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument
from .color import lab_to_rgb, rgb_to_lab
from .raster import as_image

KMEANS_MAX_ITER = 100
KMEANS_TOL = 1e-4
DEDUPE_TOL = 1e-9


def grid_step(h: int, w: int, n_segments: int) -> int:
    # round half up, never below one pixel
    return max(1, int(math.floor(math.sqrt(h * w / n_segments) + 0.5)))


def grid_superpixels(shape, n_segments: int) -> np.ndarray:
    """Label ``step x step`` blocks in row-major block order starting at 0.

    ``shape`` is ``(h, w)`` (extra trailing dimensions are ignored).
    """
    if n_segments < 1:
        raise InvalidArgument(f"number of segments must be >= 1, got {n_segments}")
    h, w = int(shape[0]), int(shape[1])
    step = grid_step(h, w, n_segments)
    blocks_per_row = -(-w // step)
    ys, xs = np.mgrid[0:h, 0:w]
    return (ys // step) * blocks_per_row + xs // step


def _kmeans_pp(points, n_clusters, rng):
    n = len(points)
    centers = np.empty((n_clusters, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    closest = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, n_clusters):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(n, p=closest / total)
        else:
            idx = rng.integers(n)
        centers[c] = points[idx]
        closest = np.minimum(closest, ((points - centers[c]) ** 2).sum(axis=1))
    return centers


def _sq_dists(points, centers):
    sq = (points ** 2).sum(1)[:, None] + (centers ** 2).sum(1)[None, :] - 2 * points @ centers.T
    return np.maximum(sq, 0.0)


def kmeans(points, n_clusters: int, seed=None, max_iter: int = KMEANS_MAX_ITER, tol: float = KMEANS_TOL):
    """Lloyd's algorithm with k-means++ seeding.

    Empty clusters are re-seeded at the point currently farthest from its
    centre. Stops once no centre moves more than ``tol``. Returns
    ``(centers, assignment, inertia)``.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if not 1 <= n_clusters <= n:
        raise InvalidArgument(f"cluster count must lie in [1, {n}], got {n_clusters}")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp(points, n_clusters, rng)
    for _ in range(max_iter):
        d = _sq_dists(points, centers)
        assign = d.argmin(axis=1)
        new = centers.copy()
        counts = np.bincount(assign, minlength=n_clusters)
        nonempty = counts > 0
        # mean as centre + mean offset: clusters of identical points keep them exactly
        offsets = points - centers[assign]
        for dim in range(points.shape[1]):
            sums = np.bincount(assign, weights=offsets[:, dim], minlength=n_clusters)
            new[nonempty, dim] += sums[nonempty] / counts[nonempty]
        if np.any(counts == 0):
            residual = d[np.arange(n), assign]
            for c in np.flatnonzero(counts == 0):
                far = int(residual.argmax())
                new[c] = points[far]
                residual[far] = -1.0
        shift = np.sqrt(((new - centers) ** 2).sum(axis=1)).max()
        centers = new
        if shift <= tol:
            break
    assign = _sq_dists(points, centers).argmin(axis=1)
    inertia = float(((points - centers[assign]) ** 2).sum())
    return centers, assign, inertia


def kmeans_palette(lab, n_colors: int, seed=None) -> np.ndarray:
    """Quantise every pixel's LAB colour into at most ``n_colors`` centres.

    Repeated centres (e.g. on a single-colour image) are dropped, so the
    palette may be shorter than ``n_colors``. Centres closer than
    ``DEDUPE_TOL`` count as repeats: a cluster mean can differ from its
    identical members in the last bit.
    """
    points = np.asarray(lab, dtype=float).reshape(-1, 3)
    if n_colors < 1:
        raise InvalidArgument(f"palette size must be >= 1, got {n_colors}")
    if n_colors > len(points):
        raise InvalidArgument(f"palette size {n_colors} exceeds pixel count {len(points)}")
    centers, _, _ = kmeans(points, n_colors, seed)
    kept = []
    for c in centers:
        if all(np.abs(c - k).max() > DEDUPE_TOL for k in kept):
            kept.append(c)
    return np.array(kept)


@dataclass(frozen=True, eq=False)
class SuperpixelResult:
    image: np.ndarray
    lab: np.ndarray
    segments: np.ndarray
    palette: np.ndarray
    assignment: np.ndarray  # palette index per segment


def superpixel_centroids(img, n_segments: int, seed=None) -> SuperpixelResult:
    img = as_image(img)
    lab = rgb_to_lab(img)
    segments = grid_superpixels(img.shape, n_segments)
    palette = kmeans_palette(lab, n_segments, seed)

    n_seg = int(segments.max()) + 1
    flat = segments.ravel()
    counts = np.bincount(flat, minlength=n_seg)
    means = np.column_stack([
        np.bincount(flat, weights=lab[..., c].ravel(), minlength=n_seg) / counts for c in range(3)
    ])
    # argmin returns the first minimum, i.e. the lower palette index on ties
    assignment = _sq_dists(means, palette).argmin(axis=1)
    out_lab = palette[assignment][segments]
    return SuperpixelResult(
        image=lab_to_rgb(out_lab), lab=out_lab, segments=segments,
        palette=palette, assignment=assignment,
    )


def superpixel_centroid_image(img, n_segments: int, seed=None) -> np.ndarray:
    """Grid-superpixel image painted with palette-snapped centroid colours."""
    return superpixel_centroids(img, n_segments, seed).image
