"""Run configuration: preprocessing stream, seed, and every detector tunable
not pinned by the scoring rule itself. Values can come from a JSON file plus
command-line overrides; unknown keys are rejected."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .imaging import FilterKind


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    stream: FilterKind = FilterKind.MEDIAN_3
    seed: int = 0
    workers: int = 1

    # segmentation
    max_coverage: float = 0.95

    # asymmetry / border
    asymmetry_threshold: float = 0.15
    border_gradient_threshold: float = 10.0
    border_patch_samples: int = 5

    # color clustering
    kmeans_k: int = 5
    color_min_fraction: float = 0.05
    color_merge_distance: float = 10.0
    color_max_score: int = 6

    # structure detectors
    variance_window: int = 5
    variance_threshold: float = 20.0
    log_sigmas: tuple[float, ...] = (2.0, 3.0, 4.0, 6.0, 8.0)
    blob_response_threshold: float = 0.08
    min_blob_count: int = 3
    adaptive_window: int = 15
    adaptive_offset: float = 5.0
    branch_point_threshold: int = 20
    canny_low: float = 50.0
    canny_high: float = 150.0
    hough_accumulator_threshold: int = 10
    hough_max_gap: int = 3
    streak_min_length_fraction: float = 0.10
    streak_band_fraction: float = 0.10
    streak_min_segments: int = 5

    # evaluation
    train_fraction: float = 0.8
    learning_rate: float = 0.1
    epochs: int = 1000

    def replace(self, **overrides) -> "PipelineConfig":
        return _from_mapping({**_to_mapping(self), **overrides})


_FIELD_NAMES = {f.name for f in dataclasses.fields(PipelineConfig)}


def _to_mapping(config: PipelineConfig) -> dict:
    out = dataclasses.asdict(config)
    out["stream"] = config.stream.value
    out["log_sigmas"] = list(config.log_sigmas)
    return out


def _from_mapping(mapping: dict) -> PipelineConfig:
    unknown = set(mapping) - _FIELD_NAMES
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    values = dict(mapping)
    if "stream" in values and not isinstance(values["stream"], FilterKind):
        try:
            values["stream"] = FilterKind(values["stream"])
        except ValueError:
            options = ", ".join(k.value for k in FilterKind)
            raise ConfigError(
                f"stream must be one of: {options} (got {values['stream']!r})"
            ) from None
    if "log_sigmas" in values:
        values["log_sigmas"] = tuple(float(s) for s in values["log_sigmas"])
    return PipelineConfig(**values)


def load_config(path: str | Path | None, **overrides) -> PipelineConfig:
    """Build a config from an optional JSON file and keyword overrides."""
    mapping: dict = {}
    if path is not None:
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config file must hold a JSON object")
        mapping.update(data)
    mapping.update({k: v for k, v in overrides.items() if v is not None})
    return _from_mapping(mapping)


def dump_config(config: PipelineConfig, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(_to_mapping(config), fh, indent=2, sort_keys=True)
        fh.write("\n")
