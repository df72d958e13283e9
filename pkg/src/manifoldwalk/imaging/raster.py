"""Raster images as ``(h, w, 3)`` uint8 arrays in RGB byte order.

File I/O goes through Pillow: PNG (RGB/RGBA/grey/palette, alpha dropped)
and binary PPM (P6) are read; PNG and PPM are written, chosen by suffix.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import InvalidArgument
from .color import rgb_to_lab

READABLE = {".png", ".ppm", ".pnm"}


def as_image(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidArgument(f"expected an (h, w, 3) image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if np.any(arr < 0) or np.any(arr > 255):
            raise InvalidArgument("channel values must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def is_image_path(path) -> bool:
    return Path(path).suffix.lower() in READABLE


def read_image(path) -> np.ndarray:
    path = Path(path)
    with Image.open(path) as im:
        return np.array(im.convert("RGB"), dtype=np.uint8)


def write_image(path, img) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in (".png", ".ppm"):
        raise InvalidArgument(f"unsupported output format {suffix!r}; use .png or .ppm")
    Image.fromarray(as_image(img), mode="RGB").save(path, format="PNG" if suffix == ".png" else "PPM")


def resize(img, w: int, h: int) -> np.ndarray:
    """Bilinear resampling with pixel-centre alignment."""
    img = as_image(img)
    if w < 1 or h < 1:
        raise InvalidArgument(f"target size must be positive, got {w}x{h}")
    in_h, in_w = img.shape[:2]
    if (in_w, in_h) == (w, h):
        return img.copy()

    def axis(n_out, n_in):
        src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        src = np.clip(src, 0.0, n_in - 1)
        lo = np.floor(src).astype(int)
        hi = np.minimum(lo + 1, n_in - 1)
        return lo, hi, src - lo

    y0, y1, wy = axis(h, in_h)
    x0, x1, wx = axis(w, in_w)
    f = img.astype(float)
    top = f[y0][:, x0] * (1 - wx)[None, :, None] + f[y0][:, x1] * wx[None, :, None]
    bottom = f[y1][:, x0] * (1 - wx)[None, :, None] + f[y1][:, x1] * wx[None, :, None]
    out = top * (1 - wy)[:, None, None] + bottom * wy[:, None, None]
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def fit_pixel_budget(img, max_pixels: int | None) -> np.ndarray:
    """Downscale (keeping aspect ratio) until ``h * w <= max_pixels``."""
    img = as_image(img)
    h, w = img.shape[:2]
    if max_pixels is None or h * w <= max_pixels:
        return img
    scale = math.sqrt(max_pixels / (h * w))
    new_w, new_h = max(1, int(w * scale)), max(1, int(h * scale))
    return resize(img, new_w, new_h)


def image_to_point_cloud(img, include_xy: bool = True) -> np.ndarray:
    """One row per pixel in raster order.

    Columns are ``(x/w, y/h)`` when ``include_xy``, followed by LAB mapped
    onto ``[0, 1]`` with fixed ranges (``L/100``, ``(a+128)/255``,
    ``(b+128)/255``) so equal colours give equal features across images.
    """
    img = as_image(img)
    h, w = img.shape[:2]
    lab = rgb_to_lab(img).reshape(-1, 3)
    feats = np.column_stack([
        lab[:, 0] / 100.0,
        (lab[:, 1] + 128.0) / 255.0,
        (lab[:, 2] + 128.0) / 255.0,
    ])
    feats = np.clip(feats, 0.0, 1.0)
    if not include_xy:
        return feats
    ys, xs = np.divmod(np.arange(h * w), w)
    return np.column_stack([xs / w, ys / h, feats])
