"""Raster primitives: grayscale conversion, 3x3 noise filters, CIELAB.

Images are plain numpy arrays of dtype uint8: shape (H, W) for grayscale,
(H, W, 3) with red-green-blue channel order for color. All functions are
pure; borders are handled by edge replication.
"""

from __future__ import annotations

from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy import ndimage

GRAY_WEIGHTS = (0.299, 0.587, 0.114)

# sRGB -> XYZ matrix and reference white, D65 / 2 degree observer.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE_D65 = np.array([0.95047, 1.00000, 1.08883])


class FilterKind(Enum):
    """The three 3x3 noise-removal filters (preprocessing streams)."""

    FLAT_AVERAGE_3 = "flat"
    GAUSSIAN_3_SIGMA1 = "gaussian"
    MEDIAN_3 = "median"


class LabPixel(NamedTuple):
    L: float
    a: float
    b: float


def validate_image(img: np.ndarray) -> np.ndarray:
    """Check that ``img`` is a uint8 raster with 1 or 3 channels."""
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8 samples, got {img.dtype}")
    if img.ndim == 2:
        h, w = img.shape
    elif img.ndim == 3 and img.shape[2] == 3:
        h, w = img.shape[:2]
    else:
        raise ValueError(f"expected (H, W) or (H, W, 3) image, got shape {img.shape}")
    if h < 1 or w < 1:
        raise ValueError("image must be at least 1x1")
    return img


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Convert to single-channel luminance; 1-channel input passes through."""
    img = validate_image(img)
    if img.ndim == 2:
        return img
    wr, wg, wb = GRAY_WEIGHTS
    lum = wr * img[:, :, 0] + wg * img[:, :, 1] + wb * img[:, :, 2]
    return np.rint(lum).astype(np.uint8)


def gaussian_kernel_3x3_sigma1() -> np.ndarray:
    """Normalized 3x3 Gaussian kernel with sigma = 1.0."""
    offsets = np.array([-1.0, 0.0, 1.0])
    dx, dy = np.meshgrid(offsets, offsets)
    k = np.exp(-(dx**2 + dy**2) / 2.0)
    return k / k.sum()


def flat_kernel_3x3() -> np.ndarray:
    return np.full((3, 3), 1.0 / 9.0)


def _filter_channel(chan: np.ndarray, kind: FilterKind) -> np.ndarray:
    if kind is FilterKind.MEDIAN_3:
        return ndimage.median_filter(chan, size=3, mode="nearest")
    kernel = (
        flat_kernel_3x3()
        if kind is FilterKind.FLAT_AVERAGE_3
        else gaussian_kernel_3x3_sigma1()
    )
    out = ndimage.correlate(chan.astype(np.float64), kernel, mode="nearest")
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def apply_filter(img: np.ndarray, kind: FilterKind) -> np.ndarray:
    """Apply one of the three noise filters; multi-channel images per channel."""
    img = validate_image(img)
    if img.ndim == 2:
        return _filter_channel(img, kind)
    out = np.empty_like(img)
    for c in range(3):
        out[:, :, c] = _filter_channel(img[:, :, c], kind)
    return out


def _srgb_to_linear(c: np.ndarray) -> np.ndarray:
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _lab_f(t: np.ndarray) -> np.ndarray:
    delta = 6.0 / 29.0
    return np.where(t > delta**3, np.cbrt(t), t / (3.0 * delta**2) + 4.0 / 29.0)


def lab_from_rgb_array(rgb: np.ndarray) -> np.ndarray:
    """Vectorized sRGB -> CIELAB for an (..., 3) uint8 array."""
    rgb = np.asarray(rgb)
    linear = _srgb_to_linear(rgb.astype(np.float64) / 255.0)
    xyz = linear @ _RGB_TO_XYZ.T
    f = _lab_f(xyz / _WHITE_D65)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def rgb_to_lab(r: int, g: int, b: int) -> LabPixel:
    """Convert a single 8-bit sRGB triple to CIELAB (D65)."""
    lab = lab_from_rgb_array(np.array([[r, g, b]], dtype=np.uint8))[0]
    return LabPixel(float(lab[0]), float(lab[1]), float(lab[2]))
