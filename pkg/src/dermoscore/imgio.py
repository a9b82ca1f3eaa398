"""Image decode/encode at the pipeline boundary, plus diagnostic renderings
(mask export, color-cluster swatches, radial-probe overlays)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .color import ColorCluster
from .geometry import centroid, radial_boundary_points


class DecodeError(Exception):
    pass


def load_image(path: str | Path) -> np.ndarray:
    """Decode PNG/JPEG into a uint8 array, normalized to gray or RGB."""
    try:
        with Image.open(path) as im:
            if im.mode in ("1", "L", "I;16", "I"):
                im = im.convert("L")
            else:
                im = im.convert("RGB")
            return np.asarray(im, dtype=np.uint8)
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc


def save_png(img: np.ndarray, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(img, dtype=np.uint8)).save(path, format="PNG")


def save_mask_png(mask: np.ndarray, path: str | Path) -> None:
    """Write a 1-bit PNG: 0 background, 255 foreground."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    img = Image.fromarray(np.where(np.asarray(mask, bool), 255, 0).astype(np.uint8))
    img.convert("1").save(path, format="PNG")


def load_mask_png(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("L")) > 127


def _lab_to_rgb(lab: np.ndarray) -> np.ndarray:
    """Inverse of the CIELAB conversion, for rendering cluster swatches."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    delta = 6.0 / 29.0

    def finv(t):
        return np.where(t > delta, t**3, 3.0 * delta**2 * (t - 4.0 / 29.0))

    white = np.array([0.95047, 1.0, 1.08883])
    xyz = np.stack([finv(fx), finv(fy), finv(fz)], axis=-1) * white
    m_inv = np.array(
        [
            [3.2404542, -1.5371385, -0.4985314],
            [-0.9692660, 1.8760108, 0.0415560],
            [0.0556434, -0.2040259, 1.0572252],
        ]
    )
    linear = np.clip(xyz @ m_inv.T, 0.0, 1.0)
    srgb = np.where(
        linear <= 0.0031308, 12.92 * linear, 1.055 * linear ** (1 / 2.4) - 0.055
    )
    return np.clip(np.rint(srgb * 255.0), 0, 255).astype(np.uint8)


def cluster_swatch(clusters: list[ColorCluster], row_height: int = 24, width: int = 160) -> np.ndarray:
    """One horizontal color band per surviving cluster."""
    if not clusters:
        return np.zeros((row_height, width, 3), dtype=np.uint8)
    rows = []
    for c in clusters:
        rgb = _lab_to_rgb(np.array(c.center))
        rows.append(np.tile(rgb, (row_height, width, 1)))
    return np.concatenate(rows, axis=0)


def ray_overlay(image: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Draw the eight border probes and the lesion outline on the image."""
    if image.ndim == 2:
        canvas = np.stack([image] * 3, axis=-1).astype(np.uint8)
    else:
        canvas = image.copy()
    mask = np.asarray(mask, bool)
    # lesion outline in green
    from scipy import ndimage

    outline = mask & ~ndimage.binary_erosion(mask)
    canvas[outline] = (0, 200, 0)

    r_bar, c_bar = centroid(mask)
    points = radial_boundary_points(mask)
    h, w = mask.shape
    for k, (pr, pc) in enumerate(points):
        length = int(np.hypot(pr - r_bar, pc - c_bar))
        ts = np.linspace(0.0, length, 2 * max(length, 1))
        theta = k * np.pi / 4.0
        rr = np.clip(np.rint(r_bar + ts * np.sin(theta)).astype(int), 0, h - 1)
        cc = np.clip(np.rint(c_bar + ts * np.cos(theta)).astype(int), 0, w - 1)
        canvas[rr, cc] = (60, 60, 255)
        canvas[max(pr - 1, 0) : pr + 2, max(pc - 1, 0) : pc + 2] = (255, 40, 40)
    return canvas
