"""Synthetic labelled lesion corpus for tests and acceptance runs.

Real dermoscopy archives cannot be redistributed, so the corpus is generated:
benign fixtures are symmetric single-color lesions engineered to score far
below the benign/suspicious boundary, malignant fixtures are asymmetric
multi-color lesions with dot, network, and streak structures engineered to
score far above the suspicious/malignant boundary. Every image ships with
its generating parameters and a ground-truth mask.

Benign lesions come in two contrast regimes: low-contrast (intensity step 8,
below the border-gradient and edge-detector thresholds, so B = 0) and
high-contrast hairline-noise fixtures (sharp dark disks under 20 bright
strokes, exercising the noise-removal streams).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy import ndimage

from .dataset import LesionRecord, Manifest, write_manifest
from .imgio import save_mask_png, save_png

CANVAS = 320
BACKGROUND = (200, 200, 200)
SOFT_LESION = (192, 192, 192)  # step of 8 gray levels: below every edge threshold
HARD_LESION = (60, 60, 60)
HAIR_COLOR = (245, 245, 245)
DOT_COLOR = (25, 20, 20)
LINE_COLOR = (40, 30, 30)

# Zone palette for malignant lesions; pairwise CIELAB distances >= 25.
ZONE_COLORS = (
    (101, 67, 33),  # dark brown
    (181, 141, 101),  # tan (lightest zone, hosts the dark dots)
    (90, 105, 135),  # blue-gray
    (150, 70, 60),  # red-brown
)


def _blank_canvas() -> np.ndarray:
    img = np.empty((CANVAS, CANVAS, 3), dtype=np.uint8)
    img[:] = BACKGROUND
    return img


def _disk(cy: float, cx: float, r: float) -> np.ndarray:
    yy, xx = np.mgrid[0:CANVAS, 0:CANVAS]
    return (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r


def _draw_line(img, y0, x0, y1, x1, color, width=1):
    length = max(abs(y1 - y0), abs(x1 - x0), 1)
    ts = np.linspace(0.0, 1.0, int(3 * length))
    rr = np.rint(y0 + ts * (y1 - y0)).astype(int)
    cc = np.rint(x0 + ts * (x1 - x0)).astype(int)
    half = width // 2
    for dr in range(-half, width - half):
        for dc in range(-half, width - half):
            r = np.clip(rr + dr, 0, CANVAS - 1)
            c = np.clip(cc + dc, 0, CANVAS - 1)
            img[r, c] = color


def _check_mask(mask: np.ndarray) -> np.ndarray:
    """Ground-truth masks must be one hole-free 8-connected component."""
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), bool))
    if count != 1:
        raise AssertionError(f"fixture mask has {count} components")
    if (ndimage.binary_fill_holes(mask) != mask).any():
        raise AssertionError("fixture mask has interior holes")
    return mask


def make_benign_disk(rng: np.random.Generator):
    r = float(rng.uniform(45, 80))
    cy = 160 + float(rng.uniform(-15, 15))
    cx = 160 + float(rng.uniform(-15, 15))
    mask = _disk(cy, cx, r)
    img = _blank_canvas()
    img[mask] = SOFT_LESION
    return img, _check_mask(mask), {"radius": r, "cy": cy, "cx": cx}


def make_hairline_disk(rng: np.random.Generator, hairs: int = 20):
    r = float(rng.uniform(40, 70))
    cy = 160 + float(rng.uniform(-15, 15))
    cx = 160 + float(rng.uniform(-15, 15))
    mask = _disk(cy, cx, r)
    img = _blank_canvas()
    img[mask] = HARD_LESION
    for _ in range(hairs):
        y0 = float(rng.uniform(0, CANVAS))
        x0 = float(rng.uniform(0, CANVAS))
        ang = float(rng.uniform(0, np.pi))
        dy, dx = np.sin(ang), np.cos(ang)
        _draw_line(
            img, y0 - 400 * dy, x0 - 400 * dx, y0 + 400 * dy, x0 + 400 * dx, HAIR_COLOR
        )
    return img, _check_mask(mask), {"radius": r, "cy": cy, "cx": cx, "hairs": hairs}


def make_half_disk(rng: np.random.Generator):
    r = float(rng.uniform(50, 75))
    cy = 160 + float(rng.uniform(-10, 10))
    cx = 160 + float(rng.uniform(-10, 10))
    phi = float(rng.uniform(0, 2 * np.pi))
    yy, xx = np.mgrid[0:CANVAS, 0:CANVAS]
    keep = (xx - cx) * np.cos(phi) + (yy - cy) * np.sin(phi) >= 0
    mask = _disk(cy, cx, r) & keep
    img = _blank_canvas()
    img[mask] = SOFT_LESION
    return img, _check_mask(mask), {"radius": r, "cy": cy, "cx": cx, "cut_angle": phi}


def _blob(rng: np.random.Generator):
    """Union of three unequal disks, asymmetric about both principal axes."""
    cy = 160 + float(rng.uniform(-8, 8))
    cx = 160 + float(rng.uniform(-8, 8))
    theta = float(rng.uniform(0, 2 * np.pi))
    r1 = float(rng.uniform(42, 50))
    r2 = float(rng.uniform(24, 30))
    d2 = float(rng.uniform(62, 70))
    r3 = float(rng.uniform(16, 20))
    d3 = float(rng.uniform(50, 58))
    phi3 = theta + np.pi / 2.0 + float(rng.uniform(-0.35, 0.35))
    c2 = (cy + d2 * np.sin(theta), cx + d2 * np.cos(theta))
    c3 = (cy + d3 * np.sin(phi3), cx + d3 * np.cos(phi3))
    mask = _disk(cy, cx, r1) | _disk(*c2, r2) | _disk(*c3, r3)
    params = {
        "cy": cy, "cx": cx, "theta": theta,
        "r1": r1, "r2": r2, "d2": d2, "r3": r3, "d3": d3, "phi3": phi3,
    }
    return _check_mask(mask), params


def _paint_zones(img, mask, rng: np.random.Generator, n_zones: int):
    """Color the lesion in angular sectors around its centroid."""
    rows, cols = np.nonzero(mask)
    cy, cx = rows.mean(), cols.mean()
    yy, xx = np.mgrid[0:CANVAS, 0:CANVAS]
    ang = np.arctan2(yy - cy, xx - cx)
    offset = float(rng.uniform(0, 2 * np.pi))
    sector = ((ang + offset) % (2 * np.pi) / (2 * np.pi) * n_zones).astype(int)
    sector = np.minimum(sector, n_zones - 1)
    for z in range(n_zones):
        img[mask & (sector == z)] = ZONE_COLORS[z]
    return sector, (cy, cx)


def _place_dots(img, regions, rng: np.random.Generator, n_dots=6, radius=4, min_sep=20):
    """Stamp dark dots into the first region, widening to the next on overflow."""
    placed: list[tuple[int, int]] = []
    for region in regions:
        order = rng.permutation(int(region.sum()))
        candidates = np.argwhere(region)
        for i in order:
            y, x = candidates[i]
            if all(np.hypot(y - py, x - px) >= min_sep for py, px in placed):
                placed.append((int(y), int(x)))
                img[_disk(y, x, radius)] = DOT_COLOR
                if len(placed) == n_dots:
                    return placed
    if len(placed) < 5:
        raise AssertionError(f"could only place {len(placed)} dots")
    return placed


def _boundary_distance(mask, cy, cx, theta):
    ts = np.arange(0.0, CANVAS, 0.5)
    rr = np.rint(cy + ts * np.sin(theta)).astype(int)
    cc = np.rint(cx + ts * np.cos(theta)).astype(int)
    ok = (rr >= 0) & (rr < CANVAS) & (cc >= 0) & (cc < CANVAS)
    hit = np.flatnonzero(mask[rr[ok], cc[ok]])
    return float(ts[ok][hit[-1]]) if hit.size else 0.0


def make_malignant(rng: np.random.Generator, variant: str):
    """Asymmetric multi-color blob with dot and network/streak structures."""
    mask, params = _blob(rng)
    img = _blank_canvas()
    n_zones = int(rng.integers(3, 5))
    sector, (cy, cx) = _paint_zones(img, mask, rng, n_zones)
    params.update({"n_zones": n_zones, "variant": variant})

    interior = ndimage.binary_erosion(mask, iterations=8)
    tan_zone = interior & (sector == 1)
    dots = _place_dots(img, tan_zone if tan_zone.sum() >= 500 else interior, rng)
    params["dots"] = dots

    if variant == "grid":
        region = ndimage.binary_erosion(mask, iterations=5) & (sector == 0)
        if region.sum() < 800:
            region = ndimage.binary_erosion(mask, iterations=5)
        rows, cols = np.nonzero(region)
        grid = np.zeros_like(mask)
        grid[rows[(rows - rows.min()) % 12 == 0], cols[(rows - rows.min()) % 12 == 0]] = True
        grid[rows[(cols - cols.min()) % 12 == 0], cols[(cols - cols.min()) % 12 == 0]] = True
        img[grid] = LINE_COLOR
    else:
        for k in range(8):
            theta = k * np.pi / 4.0 + float(rng.uniform(-0.1, 0.1))
            dist = _boundary_distance(mask, cy, cx, theta)
            y0 = cy + (dist - 14) * np.sin(theta)
            x0 = cx + (dist - 14) * np.cos(theta)
            y1 = cy + (dist + 14) * np.sin(theta)
            x1 = cx + (dist + 14) * np.cos(theta)
            _draw_line(img, y0, x0, y1, x1, LINE_COLOR, width=3)
    return img, mask, params


_BENIGN_KINDS = ("disk", "hairline_disk", "half_disk")
_MALIGNANT_KINDS = ("malignant_grid", "malignant_spokes")


def generate_corpus(out_dir: str | Path, seed: int, per_class: int = 24) -> Manifest:
    """Write a balanced labelled corpus of at least ``2 * per_class`` images.

    Layout: images/, masks/ (ground truth), truth/ (per-image JSON with the
    generating parameters), and manifest.csv. Deterministic for a given seed.
    """
    out_dir = Path(out_dir)
    for sub in ("images", "masks", "truth"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    third = per_class // 3
    plan = (
        [("disk", "benign")] * (per_class - 2 * third)
        + [("hairline_disk", "benign")] * third
        + [("half_disk", "benign")] * third
        + [("malignant_grid", "malignant")] * (per_class - per_class // 2)
        + [("malignant_spokes", "malignant")] * (per_class // 2)
    )

    records = []
    counters: dict[str, int] = {}
    for kind, label in plan:
        idx = counters.get(kind, 0)
        counters[kind] = idx + 1
        image_id = f"{kind}_{idx:03d}"
        if kind == "disk":
            img, mask, params = make_benign_disk(rng)
        elif kind == "hairline_disk":
            img, mask, params = make_hairline_disk(rng)
        elif kind == "half_disk":
            img, mask, params = make_half_disk(rng)
        else:
            img, mask, params = make_malignant(rng, kind.split("_")[1])

        image_path = out_dir / "images" / f"{image_id}.png"
        mask_path = out_dir / "masks" / f"{image_id}.png"
        save_png(img, image_path)
        save_mask_png(mask, mask_path)
        truth = {
            "image_id": image_id,
            "kind": kind,
            "label": label,
            "expected_category": "Benign" if label == "benign" else "Malignant",
            "seed": seed,
            "image": str(image_path),
            "mask": str(mask_path),
            "params": params,
        }
        with open(out_dir / "truth" / f"{image_id}.json", "w") as fh:
            json.dump(truth, fh, indent=2, sort_keys=True)
            fh.write("\n")
        dx = "nv" if label == "benign" else "mel"
        records.append(LesionRecord(image_id, str(image_path), dx, label))

    records.sort(key=lambda r: r.image_id)
    manifest = Manifest(records, provenance={"seed": seed, "per_class": per_class})
    write_manifest(manifest, out_dir / "manifest.csv")
    return manifest


def load_truth(out_dir: str | Path, image_id: str) -> dict:
    with open(Path(out_dir) / "truth" / f"{image_id}.json") as fh:
        return json.load(fh)
