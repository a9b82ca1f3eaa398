"""Shape features: asymmetry via PCA-aligned reflection IoU, border via
radial intensity-gradient probes.

Angles use the (x=col, y=row) frame, measured from the +x axis and
normalized to [0, pi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ASYMMETRY_THRESHOLD = 0.15
BORDER_GRADIENT_THRESHOLD = 10.0
BORDER_PATCH_SAMPLES = 5


class GeometryError(Exception):
    """Mask geometry is unusable for the requested feature."""


@dataclass(frozen=True)
class AsymmetryResult:
    angle: float  # principal axis, radians in [0, pi)
    d_major: float  # 1 - IoU about the major axis
    d_minor: float  # 1 - IoU about the minor axis
    a_score: int


@dataclass(frozen=True)
class BorderResult:
    gradients: tuple[float, ...]  # 8 values, one per 45-degree radial segment
    b_score: int


def centroid(mask: np.ndarray) -> tuple[float, float]:
    """(row, col) mean of the foreground pixels."""
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        raise GeometryError("empty mask")
    return float(rows.mean()), float(cols.mean())


def principal_axis(mask: np.ndarray) -> float:
    """Orientation of the largest-variance axis of the foreground pixels."""
    rows, cols = np.nonzero(mask)
    if rows.size < 2:
        raise GeometryError("principal axis needs at least 2 foreground pixels")
    pts = np.stack([cols - cols.mean(), rows - rows.mean()])  # (x, y)
    cov = pts @ pts.T / pts.shape[1]
    eigvals, eigvecs = np.linalg.eigh(cov)
    vx, vy = eigvecs[:, int(np.argmax(eigvals))]
    angle = float(np.arctan2(vy, vx)) % np.pi
    return 0.0 if angle == np.pi else angle


def rotate_mask(mask: np.ndarray, angle: float) -> np.ndarray:
    """Rotate a binary mask by ``angle`` with nearest-neighbor sampling.

    The output canvas is enlarged so no foreground pixel can be clipped.
    """
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    side = int(np.ceil(np.hypot(h, w))) + 2
    c_in = np.array([(w - 1) / 2.0, (h - 1) / 2.0])
    c_out = np.array([(side - 1) / 2.0, (side - 1) / 2.0])
    rr, cc = np.mgrid[0:side, 0:side]
    # Inverse map: rotate output coordinates by -angle back onto the input.
    x = cc - c_out[0]
    y = rr - c_out[1]
    cos_a, sin_a = np.cos(-angle), np.sin(-angle)
    src_c = np.rint(cos_a * x - sin_a * y + c_in[0]).astype(np.int64)
    src_r = np.rint(sin_a * x + cos_a * y + c_in[1]).astype(np.int64)
    valid = (src_r >= 0) & (src_r < h) & (src_c >= 0) & (src_c < w)
    out = np.zeros((side, side), dtype=bool)
    out[valid] = mask[src_r[valid], src_c[valid]]
    return out


def _reflection_distance(mask: np.ndarray, axis: int) -> float:
    """1 - IoU between one half and the other half reflected onto it.

    ``axis`` 0 reflects rows (split by the horizontal line through the
    centroid), 1 reflects columns. The split line is snapped to the nearest
    half-grid position so reflection is exact on the pixel grid; pixels on
    the line itself belong to neither half.
    """
    if axis == 1:
        mask = mask.T
    n = mask.shape[0]
    bar = centroid(mask)[0]
    line2 = int(np.rint(2.0 * bar))  # doubled split position, integer
    src = line2 - np.arange(n)
    valid = (src >= 0) & (src < n)
    reflected = np.zeros_like(mask)
    reflected[valid] = mask[src[valid]]
    half = np.arange(n) * 2 < line2  # rows strictly above the split line
    inter = int((mask & reflected)[half].sum())
    union = int((mask | reflected)[half].sum())
    if union == 0:
        return 0.0
    return 1.0 - inter / union


def axis_asymmetry(mask: np.ndarray) -> tuple[float, float]:
    """(d_major, d_minor) after aligning the principal axis horizontally."""
    angle = principal_axis(mask)
    aligned = rotate_mask(mask, -angle)
    d_major = _reflection_distance(aligned, axis=0)
    d_minor = _reflection_distance(aligned, axis=1)
    return d_major, d_minor


def a_score(d_major: float, d_minor: float, threshold: float = ASYMMETRY_THRESHOLD) -> int:
    """Count of axes whose asymmetry strictly exceeds the threshold."""
    for d in (d_major, d_minor):
        if not 0.0 <= d <= 1.0:
            raise ValueError(f"asymmetry value {d} outside [0, 1]")
    return int(d_major > threshold) + int(d_minor > threshold)


def asymmetry_result(mask: np.ndarray, threshold: float = ASYMMETRY_THRESHOLD) -> AsymmetryResult:
    angle = principal_axis(mask)
    d_major, d_minor = axis_asymmetry(mask)
    return AsymmetryResult(angle, d_major, d_minor, a_score(d_major, d_minor, threshold))


def radial_boundary_points(mask: np.ndarray) -> list[tuple[int, int]]:
    """Last foreground pixel along each of the eight 45-degree rays.

    Rays start at the foreground centroid, which must itself lie inside the
    lesion; a centroid outside the mask (highly concave shape) is an error.
    """
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    r_bar, c_bar = centroid(mask)
    r0, c0 = int(np.rint(r_bar)), int(np.rint(c_bar))
    if not (0 <= r0 < h and 0 <= c0 < w and mask[r0, c0]):
        raise GeometryError("centroid lies outside the foreground")

    points = []
    max_t = float(np.hypot(h, w))
    ts = np.arange(0.0, max_t, 0.5)
    for k in range(8):
        theta = k * np.pi / 4.0
        dx, dy = np.cos(theta), np.sin(theta)
        rr = np.rint(r_bar + ts * dy).astype(np.int64)
        cc = np.rint(c_bar + ts * dx).astype(np.int64)
        inside = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
        rr, cc = rr[inside], cc[inside]
        fg = mask[rr, cc]
        if not fg.any():
            raise GeometryError(f"ray at {k * 45} degrees never touches the foreground")
        last = int(np.flatnonzero(fg)[-1])
        points.append((int(rr[last]), int(cc[last])))
    return points


def segment_gradient(
    gray: np.ndarray,
    point: tuple[int, int],
    direction: tuple[float, float],
    samples: int = BORDER_PATCH_SAMPLES,
) -> float:
    """|mean inner patch - mean outer patch| across a boundary point.

    ``direction`` is the outward (dx, dy) unit vector of the probing ray.
    Patches are the ``samples`` pixels at unit offsets 1..samples along
    -direction (inside) and +direction (outside); offsets falling outside
    the image are dropped, and a side with no valid sample yields 0.
    """
    gray = np.asarray(gray)
    h, w = gray.shape
    r0, c0 = point
    dx, dy = direction
    sides = []
    for sign in (-1.0, 1.0):
        vals = []
        for i in range(1, samples + 1):
            r = int(np.rint(r0 + sign * i * dy))
            c = int(np.rint(c0 + sign * i * dx))
            if 0 <= r < h and 0 <= c < w:
                vals.append(float(gray[r, c]))
        if not vals:
            return 0.0
        sides.append(np.mean(vals))
    return float(abs(sides[0] - sides[1]))


def b_score(gradients, threshold: float = BORDER_GRADIENT_THRESHOLD) -> int:
    """Count of radial segments whose gradient strictly exceeds the threshold."""
    gradients = list(gradients)
    if len(gradients) != 8:
        raise ValueError(f"expected 8 gradients, got {len(gradients)}")
    return int(sum(g > threshold for g in gradients))


def border_result(
    gray: np.ndarray,
    mask: np.ndarray,
    threshold: float = BORDER_GRADIENT_THRESHOLD,
    samples: int = BORDER_PATCH_SAMPLES,
) -> BorderResult:
    points = radial_boundary_points(mask)
    gradients = []
    for k, point in enumerate(points):
        theta = k * np.pi / 4.0
        gradients.append(
            segment_gradient(gray, point, (np.cos(theta), np.sin(theta)), samples)
        )
    return BorderResult(tuple(gradients), b_score(gradients, threshold))
