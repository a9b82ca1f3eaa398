"""Command-line interface.

Commands: assess (single image -> JSON), extract (manifest -> features CSV),
evaluate (features CSV or manifest -> metrics JSON + table), make-fixtures
(synthetic labelled corpus). Exit codes: 0 success, 2 domain failure
(segmentation, degenerate inputs), 3 I/O failure (decode, missing files).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .dataset import DatasetError, load_manifest
from .evaluation import EvaluationError
from .fixtures import generate_corpus
from .geometry import GeometryError
from .imgio import (
    DecodeError,
    cluster_swatch,
    load_image,
    ray_overlay,
    save_mask_png,
    save_png,
)
from .pipeline import (
    FEATURES_HEADER,
    assess_image,
    evaluate_records,
    evaluate_rows,
    extract_features,
    format_metrics_table,
    read_features_csv,
    write_features_csv,
)
from .segmentation import SegmentationError

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_IO = 3

log = logging.getLogger("dermoscore")


def _error_json(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--stream", choices=["median", "gaussian", "flat"],
                        help="preprocessing filter (default from config: median)")
    parser.add_argument("--seed", type=int, help="seed for all randomized steps")
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--workers", type=int, help="parallel workers (default 1)")
    parser.add_argument("--overlays", action="store_true",
                        help="write diagnostic images (assess only; needs --out)")


def _build_config(args):
    return load_config(
        args.config,
        stream=args.stream,
        seed=args.seed,
        workers=args.workers,
    )


def _assessment_json(image_path: Path, config, result) -> dict:
    asym = result.features.asymmetry
    border = result.features.border
    color = result.features.color
    structures = result.features.structures
    return {
        "image": str(image_path),
        "stream": config.stream.value,
        "seed": config.seed,
        "a": result.features.a,
        "b": result.features.b,
        "c": result.features.c,
        "d": result.features.d,
        "tds": round(result.tds, 1),
        "category": result.category.value,
        "asymmetry": {
            "angle": round(asym.angle, 6),
            "d_major": round(asym.d_major, 6),
            "d_minor": round(asym.d_minor, 6),
        },
        "border": {"gradients": [round(g, 4) for g in border.gradients]},
        "color": {
            "clusters": [
                {
                    "L": round(c.center[0], 3),
                    "a": round(c.center[1], 3),
                    "b": round(c.center[2], 3),
                    "pixel_count": c.pixel_count,
                    "fraction": round(c.fraction, 6),
                }
                for c in color.clusters
            ]
        },
        "structures": {
            "structureless": structures.structureless,
            "dots_globules": structures.dots_globules,
            "pigment_network": structures.pigment_network,
            "streaks": structures.streaks,
        },
    }


def cmd_assess(args) -> int:
    config = _build_config(args)
    try:
        image = load_image(args.image)
    except (FileNotFoundError, DecodeError) as exc:
        _error_json("decode", str(exc))
        return EXIT_IO
    try:
        result = assess_image(image, config)
    except (SegmentationError, GeometryError, ValueError) as exc:
        _error_json("segmentation", str(exc))
        return EXIT_DOMAIN

    doc = _assessment_json(args.image, config, result)
    print(json.dumps(doc, indent=2))
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        stem = Path(args.image).stem
        with open(args.out / f"{stem}.assessment.json", "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        if args.overlays:
            save_mask_png(result.mask, args.out / f"{stem}.mask.png")
            save_png(
                cluster_swatch(list(result.features.color.clusters)),
                args.out / f"{stem}.clusters.png",
            )
            save_png(ray_overlay(image, result.mask), args.out / f"{stem}.rays.png")
    return EXIT_OK


def cmd_extract(args) -> int:
    config = _build_config(args)
    try:
        manifest = load_manifest(args.manifest)
    except (FileNotFoundError, DatasetError) as exc:
        _error_json("manifest", str(exc))
        return EXIT_IO
    rows, failures = extract_features(manifest, config)
    out_dir = args.out or Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "features.csv"
    write_features_csv(rows, csv_path, config.seed, config.stream.value)
    print(f"wrote {len(rows)} rows to {csv_path} ({len(failures)} failures)")
    if len(failures) > 0.2 * max(len(manifest), 1):
        _error_json(
            "extraction",
            f"{len(failures)} of {len(manifest)} images failed feature extraction",
        )
        return EXIT_DOMAIN
    return EXIT_OK


def _sniff_features_csv(path: Path) -> bool:
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                continue
            return line.strip() == ",".join(FEATURES_HEADER)
    return False


def cmd_evaluate(args) -> int:
    config = _build_config(args)
    try:
        if _sniff_features_csv(args.input):
            rows = read_features_csv(args.input)
            reports = evaluate_rows(rows, config)
        else:
            manifest = load_manifest(args.input)
            reports, _ = evaluate_records(manifest, config)
    except FileNotFoundError as exc:
        _error_json("input", str(exc))
        return EXIT_IO
    except (DatasetError, EvaluationError, ValueError) as exc:
        _error_json("evaluate", str(exc))
        return EXIT_DOMAIN

    table = format_metrics_table(reports)
    print(table, end="")
    out_dir = args.out or Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "metrics.json", "w") as fh:
        json.dump({"seed": config.seed, "reports": reports}, fh, indent=2)
        fh.write("\n")
    with open(out_dir / "metrics.txt", "w") as fh:
        fh.write(f"# seed={config.seed}\n")
        fh.write(table)
    return EXIT_OK


def cmd_make_fixtures(args) -> int:
    seed = args.seed if args.seed is not None else 0
    try:
        manifest = generate_corpus(args.out_dir, seed=seed, per_class=args.per_class)
    except OSError as exc:
        _error_json("write", str(exc))
        return EXIT_IO
    print(f"wrote {len(manifest)} fixtures to {args.out_dir} (seed={seed})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dermoscore",
        description="Rule-based ABCD skin-lesion scoring and evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assess", help="score one image, print JSON assessment")
    p.add_argument("image", type=Path)
    _add_shared_flags(p)
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("extract", help="batch feature extraction to CSV")
    p.add_argument("manifest", type=Path)
    _add_shared_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", help="score the rule and train the baseline")
    p.add_argument("input", type=Path, help="features CSV or manifest")
    _add_shared_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("make-fixtures", help="generate the synthetic corpus")
    p.add_argument("out_dir", type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--per-class", type=int, default=24)
    p.set_defaults(func=cmd_make_fixtures)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _error_json("config", str(exc))
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
