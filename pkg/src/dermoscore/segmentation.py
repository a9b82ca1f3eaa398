"""Lesion segmentation: Otsu threshold, morphological cleanup, largest component.

Masks are boolean (H, W) arrays. The lesion is assumed darker than the
surrounding skin, so foreground is intensity <= threshold.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .imaging import FilterKind, apply_filter

# 5x5 elliptical structuring element (Euclidean disk of radius 2).
ELLIPSE_5 = np.array(
    [
        [0, 0, 1, 0, 0],
        [0, 1, 1, 1, 0],
        [1, 1, 1, 1, 1],
        [0, 1, 1, 1, 0],
        [0, 0, 1, 0, 0],
    ],
    dtype=bool,
)

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


class SegmentationError(Exception):
    """Raised when no usable lesion mask can be produced."""


def otsu_threshold(img: np.ndarray) -> int:
    """Threshold maximizing between-class variance over the 256-bin histogram.

    Returns the smallest maximizing threshold. A single-intensity image
    returns that intensity (callers see a full-image foreground).
    """
    img = np.asarray(img)
    if img.size == 0:
        raise ValueError("empty image")
    if img.dtype != np.uint8:
        raise ValueError("expected uint8 image")
    lo, hi = int(img.min()), int(img.max())
    if lo == hi:
        return lo

    hist = np.bincount(img.ravel(), minlength=256).astype(np.float64)
    n = hist.sum()
    p = hist / n
    omega = np.cumsum(p)  # weight of class "<= t"
    mu = np.cumsum(p * np.arange(256))  # cumulative first moment
    mu_total = mu[-1]
    # Between-class variance: (mu_T * omega - mu)^2 / (omega * (1 - omega)).
    denom = omega * (1.0 - omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma_b = np.where(denom > 0.0, (mu_total * omega - mu) ** 2 / denom, 0.0)
    return int(np.argmax(sigma_b))


def fill_holes(mask: np.ndarray) -> np.ndarray:
    """Turn background regions not 4-connected to the border into foreground."""
    return ndimage.binary_fill_holes(mask)


def morph_clean(mask: np.ndarray) -> np.ndarray:
    """Opening then closing with the 5x5 ellipse, then hole filling.

    The area outside the image is treated as background; the mask is padded
    so scipy's border handling cannot interact with the structuring element.
    """
    mask = np.asarray(mask, dtype=bool)
    pad = 4
    padded = np.pad(mask, pad, mode="constant", constant_values=False)
    opened = ndimage.binary_opening(padded, structure=ELLIPSE_5)
    closed = ndimage.binary_closing(opened, structure=ELLIPSE_5)
    cleaned = fill_holes(closed)
    return cleaned[pad:-pad, pad:-pad]


def largest_component_fill(mask: np.ndarray) -> np.ndarray:
    """Keep only the largest 8-connected component, hole-filled.

    Area ties are broken by the component whose bounding box starts first in
    row-major order.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise SegmentationError("empty mask: no lesion component to isolate")
    labels, count = ndimage.label(mask, structure=EIGHT_CONNECTED)
    areas = np.bincount(labels.ravel())[1:]
    best = np.flatnonzero(areas == areas.max()) + 1
    if len(best) > 1:
        slices = ndimage.find_objects(labels)
        corners = [(slices[i - 1][0].start, slices[i - 1][1].start) for i in best]
        best = [b for _, b in sorted(zip(corners, best))]
    return fill_holes(labels == best[0])


def segment_lesion(img: np.ndarray, max_coverage: float = 0.95) -> np.ndarray:
    """Grayscale image -> clean single-component lesion mask.

    Pipeline: 3x3 Gaussian blur -> Otsu with <= t foreground -> morphological
    cleanup -> largest-component isolation. Raises SegmentationError when the
    result is empty or covers more than ``max_coverage`` of the image, which
    indicates there is no usable lesion/skin boundary.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("segment_lesion expects a grayscale image")
    if img.shape[0] < 32 or img.shape[1] < 32:
        raise ValueError("image must be at least 32x32")

    blurred = apply_filter(img, FilterKind.GAUSSIAN_3_SIGMA1)
    t = otsu_threshold(blurred)
    mask = blurred <= t
    if mask.mean() > max_coverage:
        raise SegmentationError(
            f"degenerate mask: threshold {t} selects {mask.mean():.1%} of the image"
        )
    mask = morph_clean(mask)
    if not mask.any():
        raise SegmentationError("degenerate mask: morphological cleanup removed everything")
    mask = largest_component_fill(mask)
    coverage = mask.mean()
    if coverage > max_coverage:
        raise SegmentationError(f"degenerate mask: lesion covers {coverage:.1%} of the image")
    return mask
