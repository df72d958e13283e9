"""sRGB <-> CIELAB (D65, 2 degree observer)."""

import numpy as np

_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
# white point taken from the matrix itself so that sRGB white maps to a = b = 0
WHITE = _RGB_TO_XYZ.sum(axis=1)

_DELTA = 6.0 / 29.0


def _f(t):
    return np.where(t > _DELTA ** 3, np.cbrt(t), t / (3 * _DELTA ** 2) + 4.0 / 29.0)


def _f_inv(t):
    return np.where(t > _DELTA, t ** 3, 3 * _DELTA ** 2 * (t - 4.0 / 29.0))


def srgb_to_linear(c):
    c = np.asarray(c, dtype=float)
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(c):
    c = np.asarray(c, dtype=float)
    return np.where(c <= 0.0031308, 12.92 * c, 1.055 * np.power(np.maximum(c, 0.0), 1 / 2.4) - 0.055)


def rgb_to_lab(img) -> np.ndarray:
    """8-bit sRGB array ``(..., 3)`` to float LAB with ``L`` in ``[0, 100]``."""
    rgb = np.asarray(img, dtype=float) / 255.0
    xyz = srgb_to_linear(rgb) @ _RGB_TO_XYZ.T / WHITE
    f = _f(xyz)
    L = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([L, a, b], axis=-1)


def lab_to_rgb(lab) -> np.ndarray:
    """LAB ``(..., 3)`` back to 8-bit sRGB; out-of-gamut colours are clipped."""
    lab = np.asarray(lab, dtype=float)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = _f_inv(np.stack([fx, fy, fz], axis=-1)) * WHITE
    linear = np.clip(xyz @ _XYZ_TO_RGB.T, 0.0, 1.0)
    return np.clip(np.rint(linear_to_srgb(linear) * 255.0), 0, 255).astype(np.uint8)
