"""Image preprocessing and image-to-graph adapters."""

from .color import lab_to_rgb, rgb_to_lab
from .compare import image_distance, prepare_pair
from .raster import image_to_point_cloud, read_image, resize, write_image
from .superpixel import (
    SuperpixelResult,
    grid_superpixels,
    kmeans,
    kmeans_palette,
    superpixel_centroid_image,
    superpixel_centroids,
)

__all__ = [
    "rgb_to_lab",
    "lab_to_rgb",
    "image_distance",
    "prepare_pair",
    "image_to_point_cloud",
    "read_image",
    "write_image",
    "resize",
    "SuperpixelResult",
    "grid_superpixels",
    "kmeans",
    "kmeans_palette",
    "superpixel_centroid_image",
    "superpixel_centroids",
]
