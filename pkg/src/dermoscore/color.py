"""Color diversity score: seeded K-Means in CIELAB with significance
filtering and closest-pair cluster merging."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import lab_from_rgb_array

KMEANS_K = 5
KMEANS_MAX_ITER = 100
KMEANS_TOL = 1e-4
MIN_CLUSTER_FRACTION = 0.05
MERGE_DISTANCE = 10.0
MAX_COLOR_SCORE = 6


@dataclass(frozen=True)
class ColorCluster:
    center: tuple[float, float, float]  # (L, a, b)
    pixel_count: int
    fraction: float


@dataclass(frozen=True)
class ColorResult:
    clusters: tuple[ColorCluster, ...]
    c_score: int


def _assign(pixels: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = ((pixels[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def _seed_centers(pixels: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ style seeding: squared-distance weighted draws."""
    n = pixels.shape[0]
    centers = np.empty((k, 3))
    centers[0] = pixels[rng.integers(n)]
    d2 = ((pixels - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            cum = np.cumsum(d2 / total)
            idx = int(np.searchsorted(cum, rng.random(), side="right"))
            idx = min(idx, n - 1)
        centers[j] = pixels[idx]
        d2 = np.minimum(d2, ((pixels - centers[j]) ** 2).sum(axis=1))
    return centers


def kmeans_lab(
    pixels: np.ndarray,
    k: int = KMEANS_K,
    seed: int = 0,
    max_iter: int = KMEANS_MAX_ITER,
    tol: float = KMEANS_TOL,
) -> list[ColorCluster]:
    """Lloyd's algorithm on LAB pixels, deterministic for a given seed.

    The effective cluster count is min(k, number of distinct pixels). Empty
    clusters are re-seeded to the pixel farthest from its assigned center.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim != 2 or pixels.shape[1] != 3:
        raise ValueError("expected an (N, 3) array of LAB pixels")
    n = pixels.shape[0]
    if n == 0:
        raise ValueError("empty pixel list")
    if k < 1:
        raise ValueError("k must be >= 1")
    k = min(k, len(np.unique(pixels, axis=0)))

    rng = np.random.default_rng(seed)
    centers = _seed_centers(pixels, k, rng)
    for _ in range(max_iter):
        assign = _assign(pixels, centers)
        for j in range(k):
            if not (assign == j).any():
                dist_own = ((pixels - centers[assign]) ** 2).sum(axis=1)
                far = int(np.argmax(dist_own))
                centers[j] = pixels[far]
                assign = _assign(pixels, centers)
        new_centers = np.stack([pixels[assign == j].mean(axis=0) for j in range(k)])
        shift = np.abs(new_centers - centers).max()
        centers = new_centers
        if shift < tol:
            break

    assign = _assign(pixels, centers)
    counts = np.bincount(assign, minlength=k)
    return [
        ColorCluster(tuple(centers[j]), int(counts[j]), counts[j] / n)
        for j in range(k)
        if counts[j] > 0
    ]


def significant_clusters(
    clusters: list[ColorCluster], min_fraction: float = MIN_CLUSTER_FRACTION
) -> list[ColorCluster]:
    """Keep clusters covering at least ``min_fraction`` of the lesion."""
    return [c for c in clusters if c.fraction >= min_fraction]


def merge_close_clusters(
    clusters: list[ColorCluster], min_distance: float = MERGE_DISTANCE
) -> list[ColorCluster]:
    """Iteratively merge the closest pair of centers under ``min_distance``.

    Merged clusters get the pixel-count-weighted mean center; distance ties
    are broken toward the pair with the lowest indices.
    """
    merged = list(clusters)
    while len(merged) > 1:
        best = None
        for i in range(len(merged)):
            for j in range(i + 1, len(merged)):
                d = float(
                    np.linalg.norm(
                        np.subtract(merged[i].center, merged[j].center)
                    )
                )
                if best is None or d < best[0]:
                    best = (d, i, j)
        d, i, j = best
        if d >= min_distance:
            break
        a, b = merged[i], merged[j]
        total = a.pixel_count + b.pixel_count
        center = tuple(
            (np.asarray(a.center) * a.pixel_count + np.asarray(b.center) * b.pixel_count)
            / total
        )
        merged[i] = ColorCluster(center, total, a.fraction + b.fraction)
        del merged[j]
    return merged


def color_result(
    image: np.ndarray,
    mask: np.ndarray,
    seed: int = 0,
    k: int = KMEANS_K,
    min_fraction: float = MIN_CLUSTER_FRACTION,
    merge_distance: float = MERGE_DISTANCE,
    max_score: int = MAX_COLOR_SCORE,
) -> ColorResult:
    """Cluster the lesion's LAB pixels and count distinct significant colors."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("empty mask")
    if image.ndim == 2:
        rgb = np.stack([image[mask]] * 3, axis=1)
    else:
        rgb = image[mask]
    lab = lab_from_rgb_array(rgb)
    clusters = kmeans_lab(lab, k=k, seed=seed)
    survivors = merge_close_clusters(
        significant_clusters(clusters, min_fraction), merge_distance
    )
    score = max(1, min(len(survivors), max_score))
    return ColorResult(tuple(survivors), score)
