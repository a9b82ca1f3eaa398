"""End-to-end per-image assessment and the batch feature-extraction /
evaluation drivers used by the command line.

Batch work may fan out to a process pool; results are always reduced in
manifest order so outputs do not depend on the worker count.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .color import color_result
from .config import PipelineConfig
from .dataset import LesionRecord, Manifest
from .evaluation import EvaluationError, MetricsReport, evaluate_feature_table
from .geometry import GeometryError, asymmetry_result, border_result
from .imaging import apply_filter, to_grayscale, validate_image
from .imgio import DecodeError, load_image
from .scoring import (
    AbcdFeatures,
    Category,
    assess_tds,
    binary_from_assessment,
)
from .segmentation import SegmentationError, segment_lesion
from .structures import structures_result

log = logging.getLogger(__name__)

FEATURES_HEADER = ["image_id", "stream", "a", "b", "c", "d", "tds", "category", "label"]


@dataclass(frozen=True)
class Assessment:
    features: AbcdFeatures
    tds: float
    category: Category
    mask: np.ndarray


@dataclass(frozen=True)
class FeatureRow:
    image_id: str
    stream: str
    a: int
    b: int
    c: int
    d: int
    tds: float
    category: str
    label: str


def assess_image(image: np.ndarray, config: PipelineConfig | None = None) -> Assessment:
    """Preprocess, segment, extract A/B/C/D, and score a single image."""
    config = config or PipelineConfig()
    image = validate_image(image)
    filtered = apply_filter(image, config.stream)
    gray = to_grayscale(filtered)
    mask = segment_lesion(gray, max_coverage=config.max_coverage)

    asym = asymmetry_result(mask, threshold=config.asymmetry_threshold)
    border = border_result(
        gray,
        mask,
        threshold=config.border_gradient_threshold,
        samples=config.border_patch_samples,
    )
    color = color_result(
        filtered,
        mask,
        seed=config.seed,
        k=config.kmeans_k,
        min_fraction=config.color_min_fraction,
        merge_distance=config.color_merge_distance,
        max_score=config.color_max_score,
    )
    structures = structures_result(
        gray,
        mask,
        seed=config.seed,
        variance_window=config.variance_window,
        variance_threshold=config.variance_threshold,
        log_sigmas=config.log_sigmas,
        blob_response_threshold=config.blob_response_threshold,
        min_blob_count=config.min_blob_count,
        adaptive_window=config.adaptive_window,
        adaptive_offset=config.adaptive_offset,
        branch_threshold=config.branch_point_threshold,
        canny_low=config.canny_low,
        canny_high=config.canny_high,
        hough_threshold=config.hough_accumulator_threshold,
        hough_max_gap=config.hough_max_gap,
        streak_min_length_fraction=config.streak_min_length_fraction,
        streak_band_fraction=config.streak_band_fraction,
        streak_min_segments=config.streak_min_segments,
    )
    features = AbcdFeatures(
        asym.a_score, border.b_score, color.c_score, structures.d_score,
        asym, border, color, structures,
    )
    assessment = assess_tds(features)
    return Assessment(features, assessment.tds, assessment.category, mask)


def _extract_one(args: tuple[LesionRecord, PipelineConfig]):
    record, config = args
    try:
        image = load_image(record.image_path)
        result = assess_image(image, config)
    except (FileNotFoundError, DecodeError, SegmentationError, GeometryError, ValueError) as exc:
        return record.image_id, None, f"{type(exc).__name__}: {exc}"
    row = FeatureRow(
        image_id=record.image_id,
        stream=config.stream.value,
        a=result.features.a,
        b=result.features.b,
        c=result.features.c,
        d=result.features.d,
        tds=result.tds,
        category=result.category.value,
        label=record.label,
    )
    return record.image_id, row, None


def extract_features(
    manifest: Manifest, config: PipelineConfig
) -> tuple[list[FeatureRow], list[tuple[str, str]]]:
    """Assess every manifest image; failed images are reported, not fatal.

    Row order always equals manifest order, independent of worker count.
    """
    jobs = [(record, config) for record in manifest.records]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_extract_one, jobs))
    else:
        results = [_extract_one(job) for job in jobs]

    rows: list[FeatureRow] = []
    failures: list[tuple[str, str]] = []
    for image_id, row, error in results:
        if row is None:
            failures.append((image_id, error))
            log.warning("feature extraction failed for %s: %s", image_id, error)
        else:
            rows.append(row)
    return rows, failures


def write_features_csv(
    rows: list[FeatureRow], path: str | Path, seed: int, stream: str
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# seed={seed}\n# stream={stream}\n")
        writer = csv.writer(fh)
        writer.writerow(FEATURES_HEADER)
        for r in rows:
            writer.writerow(
                [r.image_id, r.stream, r.a, r.b, r.c, r.d, f"{r.tds:.1f}",
                 r.category, r.label]
            )


def read_features_csv(path: str | Path) -> list[FeatureRow]:
    path = Path(path)
    with open(path, newline="") as fh:
        data_lines = [line for line in fh if not line.startswith("#")]
    rows = list(csv.reader(data_lines))
    if not rows or rows[0] != FEATURES_HEADER:
        raise ValueError(f"{path}: expected header {','.join(FEATURES_HEADER)}")
    out = []
    for row in rows[1:]:
        image_id, stream, a, b, c, d, tds, category, label = row
        out.append(
            FeatureRow(image_id, stream, int(a), int(b), int(c), int(d),
                       float(tds), category, label)
        )
    return out


def evaluate_rows(
    rows: list[FeatureRow],
    config: PipelineConfig,
    excluded_count: int = 0,
) -> list[dict]:
    """Score the TDS rule and the logistic baseline from a feature table.

    Returns one report dict per method with the serialization keys:
    stream, method, tp, fp, fn, tn, accuracy, precision, recall, f1, auc,
    excluded_count.
    """
    if not rows:
        raise EvaluationError("no feature rows to evaluate")
    features = np.array([[r.a, r.b, r.c, r.d, r.tds] for r in rows], dtype=np.float64)
    labels = np.array([1 if r.label == "malignant" else 0 for r in rows])
    tds = np.array([r.tds for r in rows])
    rule_pred = np.array(
        [
            1 if binary_from_assessment(Category(r.category)) == "malignant" else 0
            for r in rows
        ]
    )
    reports = evaluate_feature_table(
        features,
        tds,
        rule_pred,
        labels,
        seed=config.seed,
        train_fraction=config.train_fraction,
        learning_rate=config.learning_rate,
        epochs=config.epochs,
    )
    stream = rows[0].stream
    out = []
    for method in ("rule", "lr"):
        report: MetricsReport = reports["rule" if method == "rule" else "model"]
        out.append(
            {
                "stream": stream,
                "method": method,
                **report.as_dict(),
                "excluded_count": excluded_count,
            }
        )
    return out


def evaluate_records(
    manifest: Manifest, config: PipelineConfig
) -> tuple[list[dict], list[tuple[str, str]]]:
    """Extract features from a manifest, then evaluate rule and model."""
    rows, failures = extract_features(manifest, config)
    reports = evaluate_rows(rows, config, excluded_count=len(failures))
    return reports, failures


def format_metrics_table(reports: list[dict]) -> str:
    """Aligned text table with the same columns as the results summary."""
    header = ["Stream", "Model", "Acc", "Prec", "Rec", "F1", "AUC"]
    names = {"rule": "Rule", "lr": "LR"}
    rows = [
        [
            r["stream"],
            names.get(r["method"], r["method"]),
            f"{r['accuracy']:.3f}",
            f"{r['precision']:.3f}",
            f"{r['recall']:.3f}",
            f"{r['f1']:.3f}",
            f"{r['auc']:.3f}",
        ]
        for r in reports
    ]
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    for row in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    return "\n".join(lines) + "\n"
