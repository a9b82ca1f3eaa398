"""Dermoscopic structure detectors: structureless areas, dots/globules,
pigment network, and streaks. Each detector returns a binary presence flag;
their sum is the structures score.

The underlying primitives (multi-scale blob detection, Zhang-Suen thinning,
Canny edges, progressive probabilistic Hough) are exported for direct use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

VARIANCE_WINDOW = 5
VARIANCE_THRESHOLD = 20.0
LOG_SIGMAS = (2.0, 3.0, 4.0, 6.0, 8.0)
BLOB_RESPONSE_THRESHOLD = 0.08
MIN_BLOB_COUNT = 3
ADAPTIVE_WINDOW = 15
ADAPTIVE_OFFSET = 5.0
BRANCH_POINT_THRESHOLD = 20
CANNY_LOW = 50.0
CANNY_HIGH = 150.0
HOUGH_ACCUMULATOR_THRESHOLD = 10
HOUGH_MAX_GAP = 3
STREAK_MIN_LENGTH_FRACTION = 0.10
STREAK_MIN_SEGMENTS = 5
STREAK_BAND_FRACTION = 0.10

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = _SOBEL_X.T


@dataclass(frozen=True)
class StructuresResult:
    structureless: bool
    dots_globules: bool
    pigment_network: bool
    streaks: bool
    d_score: int


def d_score(flags) -> int:
    """Sum of the four binary structure flags."""
    flags = list(flags)
    if len(flags) != 4:
        raise ValueError(f"expected 4 flags, got {len(flags)}")
    return int(sum(bool(f) for f in flags))


# ---------------------------------------------------------------------------
# Structureless areas


def local_variance(gray: np.ndarray, window: int = VARIANCE_WINDOW) -> np.ndarray:
    g = np.asarray(gray, dtype=np.float64)
    mean = ndimage.uniform_filter(g, window, mode="nearest")
    mean_sq = ndimage.uniform_filter(g * g, window, mode="nearest")
    return np.maximum(mean_sq - mean * mean, 0.0)


def structureless_present(
    gray: np.ndarray,
    mask: np.ndarray,
    window: int = VARIANCE_WINDOW,
    threshold: float = VARIANCE_THRESHOLD,
) -> bool:
    """True when the median local intensity variance inside the mask is low."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("empty mask")
    var = local_variance(gray, window)
    return bool(np.median(var[mask]) < threshold)


# ---------------------------------------------------------------------------
# Dots / globules (multi-scale Laplacian-of-Gaussian blob detection)


def count_blobs(
    gray: np.ndarray,
    mask: np.ndarray,
    sigmas=LOG_SIGMAS,
    response_threshold: float = BLOB_RESPONSE_THRESHOLD,
) -> int:
    """Count dark blobs inside the mask interior.

    Scale-normalized LoG responses over ``sigmas`` on the unit-normalized
    image; candidates are 3x3x3 scale-space local maxima above the response
    threshold, then greedily de-duplicated across scales (strongest first).
    """
    mask = np.asarray(mask, dtype=bool)
    img = np.asarray(gray, dtype=np.float64) / 255.0
    sigmas = list(sigmas)
    stack = np.stack(
        [s * s * ndimage.gaussian_laplace(img, s) for s in sigmas]
    )
    local_max = stack == ndimage.maximum_filter(stack, size=(3, 3, 3), mode="nearest")
    interior = ndimage.binary_erosion(mask, structure=np.ones((3, 3), dtype=bool))
    cand = local_max & (stack > response_threshold) & interior[None, :, :]
    if not cand.any():
        return 0

    s_idx, rr, cc = np.nonzero(cand)
    responses = stack[s_idx, rr, cc]
    order = np.argsort(-responses, kind="stable")
    accepted: list[tuple[float, float, float]] = []  # (row, col, sigma)
    for i in order:
        r, c, sig = float(rr[i]), float(cc[i]), sigmas[int(s_idx[i])]
        radius = np.sqrt(2.0) * sig
        if any(
            np.hypot(r - ar, c - ac) < max(radius, np.sqrt(2.0) * asig)
            for ar, ac, asig in accepted
        ):
            continue
        accepted.append((r, c, sig))
    return len(accepted)


def dots_globules_present(
    gray: np.ndarray,
    mask: np.ndarray,
    sigmas=LOG_SIGMAS,
    response_threshold: float = BLOB_RESPONSE_THRESHOLD,
    min_count: int = MIN_BLOB_COUNT,
) -> bool:
    """True when at least ``min_count`` circular blobs are found in the lesion."""
    return count_blobs(gray, mask, sigmas, response_threshold) >= min_count


# ---------------------------------------------------------------------------
# Pigment network (adaptive threshold -> thinning -> branch points)


def zhang_suen_thin(mask: np.ndarray) -> np.ndarray:
    """Iterative two-subpass thinning to a 1-pixel-wide skeleton."""
    img = np.pad(np.asarray(mask, dtype=bool), 1, constant_values=False)

    def neighbors(a):
        return (
            a[:-2, 1:-1],  # P2 north
            a[:-2, 2:],    # P3
            a[1:-1, 2:],   # P4 east
            a[2:, 2:],     # P5
            a[2:, 1:-1],   # P6 south
            a[2:, :-2],    # P7
            a[1:-1, :-2],  # P8 west
            a[:-2, :-2],   # P9
        )

    changed = True
    while changed:
        changed = False
        for step in (0, 1):
            p = neighbors(img)
            core = img[1:-1, 1:-1]
            b = sum(n.astype(np.uint8) for n in p)
            ring = np.stack(p + (p[0],)).astype(np.int8)
            a = ((ring[1:] - ring[:-1]) == 1).sum(axis=0)
            if step == 0:
                c1 = ~(p[0] & p[2] & p[4])
                c2 = ~(p[2] & p[4] & p[6])
            else:
                c1 = ~(p[0] & p[2] & p[6])
                c2 = ~(p[0] & p[4] & p[6])
            remove = core & (b >= 2) & (b <= 6) & (a == 1) & c1 & c2
            if remove.any():
                core &= ~remove
                changed = True
    return img[1:-1, 1:-1]


def branch_points(skeleton: np.ndarray) -> np.ndarray:
    """Skeleton pixels with 3 or more skeleton neighbors (8-connectivity)."""
    skel = np.asarray(skeleton, dtype=bool)
    kernel = np.ones((3, 3))
    kernel[1, 1] = 0.0
    counts = ndimage.correlate(skel.astype(np.float64), kernel, mode="constant")
    return skel & (counts >= 3)


def pigment_network_present(
    gray: np.ndarray,
    mask: np.ndarray,
    window: int = ADAPTIVE_WINDOW,
    offset: float = ADAPTIVE_OFFSET,
    branch_threshold: int = BRANCH_POINT_THRESHOLD,
) -> bool:
    """True when the skeletonized dark network has many branch points."""
    mask = np.asarray(mask, dtype=bool)
    g = np.asarray(gray, dtype=np.float64)
    local_mean = ndimage.uniform_filter(g, window, mode="nearest")
    dark = (g < local_mean - offset) & mask
    if not dark.any():
        return False
    skel = zhang_suen_thin(dark)
    return int(branch_points(skel).sum()) > branch_threshold


# ---------------------------------------------------------------------------
# Streaks / pseudopods (Canny edges -> probabilistic Hough in a boundary band)


def canny_edges(
    gray: np.ndarray, low: float = CANNY_LOW, high: float = CANNY_HIGH
) -> np.ndarray:
    """Canny edge map using 3x3 Sobel gradients and hysteresis thresholds."""
    g = np.asarray(gray, dtype=np.float64)
    gx = ndimage.correlate(g, _SOBEL_X, mode="nearest")
    gy = ndimage.correlate(g, _SOBEL_Y, mode="nearest")
    mag = np.hypot(gx, gy)

    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    padded = np.pad(mag, 1, mode="constant")
    h, w = mag.shape
    offsets = {
        0: ((0, 1), (0, -1)),
        45: ((1, 1), (-1, -1)),
        90: ((1, 0), (-1, 0)),
        135: ((1, -1), (-1, 1)),
    }
    nms = np.zeros_like(mag, dtype=bool)
    bins = ((angle + 22.5) // 45.0).astype(int) % 4
    for b, ((dr1, dc1), (dr2, dc2)) in enumerate(
        offsets[k] for k in (0, 45, 90, 135)
    ):
        sel = bins == b
        n1 = padded[1 + dr1 : 1 + dr1 + h, 1 + dc1 : 1 + dc1 + w]
        n2 = padded[1 + dr2 : 1 + dr2 + h, 1 + dc2 : 1 + dc2 + w]
        nms |= sel & (mag >= n1) & (mag >= n2)

    weak = nms & (mag >= low)
    strong = nms & (mag >= high)
    if not strong.any():
        return np.zeros_like(weak)
    labels, _ = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    keep = np.unique(labels[strong])
    return weak & np.isin(labels, keep[keep > 0])


def probabilistic_hough_segments(
    edges: np.ndarray,
    min_length: float,
    threshold: int = HOUGH_ACCUMULATOR_THRESHOLD,
    max_gap: int = HOUGH_MAX_GAP,
    theta_res_deg: float = 1.0,
    seed: int = 0,
) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Progressive probabilistic Hough transform for line segments.

    Edge points are visited in a seeded random order; each votes into a
    (theta, rho) accumulator at 1-pixel rho and ``theta_res_deg`` resolution.
    When a point's best line reaches ``threshold`` votes, the line is walked
    with gap tolerance ``max_gap``; segments at least ``min_length`` long are
    kept, and their pixels (with any votes they cast) are retired.
    Returns segments as ((x1, y1), (x2, y2)) endpoints.
    """
    edges = np.asarray(edges, dtype=bool)
    points = np.argwhere(edges)
    if points.size == 0:
        return []
    h, w = edges.shape
    thetas = np.deg2rad(np.arange(0.0, 180.0, theta_res_deg))
    cos_t, sin_t = np.cos(thetas), np.sin(thetas)
    rho_off = int(np.ceil(np.hypot(h, w)))
    acc = np.zeros((len(thetas), 2 * rho_off + 1), dtype=np.int32)

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(points))
    remaining = edges.copy()
    voted = np.zeros_like(edges)
    segments = []

    def rho_indices(r, c):
        return np.rint(c * cos_t + r * sin_t).astype(np.int64) + rho_off

    for idx in order:
        r, c = points[idx]
        if not remaining[r, c]:
            continue
        rhos = rho_indices(r, c)
        acc[np.arange(len(thetas)), rhos] += 1
        voted[r, c] = True
        line_votes = acc[np.arange(len(thetas)), rhos]
        best_t = int(np.argmax(line_votes))
        if line_votes[best_t] < threshold:
            continue

        # Walk along the line direction in both senses, tolerating gaps.
        dx, dy = -sin_t[best_t], cos_t[best_t]
        ends = []
        trail = [(r, c)]
        for sign in (1.0, -1.0):
            gap = 0
            end = (r, c)
            step = 1
            while gap <= max_gap:
                rr = int(np.rint(r + sign * step * dy))
                cc = int(np.rint(c + sign * step * dx))
                step += 1
                if not (0 <= rr < h and 0 <= cc < w):
                    break
                if remaining[rr, cc]:
                    gap = 0
                    end = (rr, cc)
                    trail.append((rr, cc))
                else:
                    gap += 1
            ends.append(end)
        (r1, c1), (r2, c2) = ends
        length = float(np.hypot(r1 - r2, c1 - c2))
        if length < min_length:
            continue
        for rr, cc in trail:
            if remaining[rr, cc]:
                remaining[rr, cc] = False
                if voted[rr, cc]:
                    acc[np.arange(len(thetas)), rho_indices(rr, cc)] -= 1
                    voted[rr, cc] = False
        segments.append(((int(c1), int(r1)), (int(c2), int(r2))))
    return segments


def _disk(radius: int) -> np.ndarray:
    rr, cc = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    return rr * rr + cc * cc <= radius * radius


def boundary_band(mask: np.ndarray, band_fraction: float = STREAK_BAND_FRACTION) -> np.ndarray:
    """Band of pixels around the mask boundary, sized by equivalent diameter."""
    mask = np.asarray(mask, dtype=bool)
    area = int(mask.sum())
    if area == 0:
        raise ValueError("empty mask")
    equiv_diameter = 2.0 * np.sqrt(area / np.pi)
    radius = max(1, int(np.rint(band_fraction * equiv_diameter)))
    eroded = ndimage.binary_erosion(mask, structure=np.ones((3, 3), dtype=bool))
    boundary = mask & ~eroded
    return ndimage.binary_dilation(boundary, structure=_disk(radius))


def find_streak_segments(
    gray: np.ndarray,
    mask: np.ndarray,
    canny_low: float = CANNY_LOW,
    canny_high: float = CANNY_HIGH,
    hough_threshold: int = HOUGH_ACCUMULATOR_THRESHOLD,
    max_gap: int = HOUGH_MAX_GAP,
    min_length_fraction: float = STREAK_MIN_LENGTH_FRACTION,
    band_fraction: float = STREAK_BAND_FRACTION,
    seed: int = 0,
) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Line segments detected in the lesion's boundary band."""
    mask = np.asarray(mask, dtype=bool)
    band = boundary_band(mask, band_fraction)
    edges = canny_edges(gray, canny_low, canny_high) & band
    equiv_diameter = 2.0 * np.sqrt(mask.sum() / np.pi)
    min_length = max(1.0, min_length_fraction * equiv_diameter)
    return probabilistic_hough_segments(
        edges, min_length=min_length, threshold=hough_threshold, max_gap=max_gap, seed=seed
    )


def streaks_present(
    gray: np.ndarray,
    mask: np.ndarray,
    min_segments: int = STREAK_MIN_SEGMENTS,
    seed: int = 0,
    **kwargs,
) -> bool:
    """True when strictly more than ``min_segments`` line segments are found."""
    return len(find_streak_segments(gray, mask, seed=seed, **kwargs)) > min_segments


def structures_result(
    gray: np.ndarray,
    mask: np.ndarray,
    seed: int = 0,
    variance_window: int = VARIANCE_WINDOW,
    variance_threshold: float = VARIANCE_THRESHOLD,
    log_sigmas=LOG_SIGMAS,
    blob_response_threshold: float = BLOB_RESPONSE_THRESHOLD,
    min_blob_count: int = MIN_BLOB_COUNT,
    adaptive_window: int = ADAPTIVE_WINDOW,
    adaptive_offset: float = ADAPTIVE_OFFSET,
    branch_threshold: int = BRANCH_POINT_THRESHOLD,
    canny_low: float = CANNY_LOW,
    canny_high: float = CANNY_HIGH,
    hough_threshold: int = HOUGH_ACCUMULATOR_THRESHOLD,
    hough_max_gap: int = HOUGH_MAX_GAP,
    streak_min_length_fraction: float = STREAK_MIN_LENGTH_FRACTION,
    streak_band_fraction: float = STREAK_BAND_FRACTION,
    streak_min_segments: int = STREAK_MIN_SEGMENTS,
) -> StructuresResult:
    flags = (
        structureless_present(gray, mask, variance_window, variance_threshold),
        dots_globules_present(
            gray, mask, log_sigmas, blob_response_threshold, min_blob_count
        ),
        pigment_network_present(
            gray, mask, adaptive_window, adaptive_offset, branch_threshold
        ),
        streaks_present(
            gray,
            mask,
            min_segments=streak_min_segments,
            seed=seed,
            canny_low=canny_low,
            canny_high=canny_high,
            hough_threshold=hough_threshold,
            max_gap=hough_max_gap,
            min_length_fraction=streak_min_length_fraction,
            band_fraction=streak_band_fraction,
        ),
    )
    return StructuresResult(*flags, d_score(flags))
