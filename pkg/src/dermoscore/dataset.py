"""HAM10000-style metadata ingest: diagnosis parsing, binary labelling, and
seeded balanced subsets persisted as manifest files."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DX_CODES = ("akiec", "bcc", "bkl", "df", "mel", "nv", "vasc")
MALIGNANT_DX = frozenset({"mel", "bcc", "akiec"})

MANIFEST_HEADER = ["image_id", "image_path", "dx", "label"]


class DatasetError(Exception):
    pass


@dataclass(frozen=True)
class LesionRecord:
    image_id: str
    image_path: str
    dx: str
    label: str


@dataclass
class Manifest:
    records: list[LesionRecord]
    provenance: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def binary_label(dx: str) -> str:
    """Map a HAM10000 diagnosis code to benign/malignant.

    Melanoma, basal cell carcinoma, and the actinic keratosis / carcinoma
    class are malignant; nevi, benign keratoses, dermatofibroma, and
    vascular lesions are benign.
    """
    if dx not in DX_CODES:
        raise DatasetError(f"unknown diagnosis code {dx!r}")
    return "malignant" if dx in MALIGNANT_DX else "benign"


def parse_metadata(
    csv_path: str | Path,
    image_dir: str | Path = "",
    extension: str = ".jpg",
) -> list[LesionRecord]:
    """Read HAM10000 metadata rows into labelled records.

    Requires ``image_id`` and ``dx`` columns; rejects unknown diagnosis codes
    and duplicate image ids, naming the offending row.
    """
    csv_path = Path(csv_path)
    records: list[LesionRecord] = []
    seen: set[str] = set()
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"image_id", "dx"} <= set(reader.fieldnames):
            raise DatasetError(
                f"{csv_path}: header must include image_id and dx columns"
            )
        for row_num, row in enumerate(reader, start=2):
            image_id = (row["image_id"] or "").strip()
            dx = (row["dx"] or "").strip()
            if not image_id:
                raise DatasetError(f"{csv_path}: row {row_num}: empty image_id")
            if image_id in seen:
                raise DatasetError(
                    f"{csv_path}: row {row_num}: duplicate image_id {image_id!r}"
                )
            seen.add(image_id)
            try:
                label = binary_label(dx)
            except DatasetError as exc:
                raise DatasetError(f"{csv_path}: row {row_num}: {exc}") from None
            path = str(Path(image_dir) / f"{image_id}{extension}")
            records.append(LesionRecord(image_id, path, dx, label))
    return records


def balanced_subset(
    records: list[LesionRecord], per_class: int, seed: int
) -> Manifest:
    """Seeded uniform sample of ``per_class`` records from each label.

    Output records are ordered by image_id so the manifest is deterministic.
    """
    rng = np.random.default_rng(seed)
    chosen: list[LesionRecord] = []
    for label in ("benign", "malignant"):
        pool = [r for r in records if r.label == label]
        if len(pool) < per_class:
            raise DatasetError(
                f"need {per_class} {label} records, only {len(pool)} available"
            )
        idx = rng.choice(len(pool), size=per_class, replace=False)
        chosen.extend(pool[i] for i in idx)
    chosen.sort(key=lambda r: r.image_id)
    return Manifest(
        records=chosen,
        provenance={"per_class": per_class, "seed": seed},
    )


def write_manifest(manifest: Manifest, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for key in sorted(manifest.provenance):
            fh.write(f"# {key}={manifest.provenance[key]}\n")
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        for r in manifest.records:
            writer.writerow([r.image_id, r.image_path, r.dx, r.label])


def load_manifest(path: str | Path, require_files: bool = False) -> Manifest:
    """Read a manifest file back; ``#`` lines are provenance comments.

    With ``require_files`` every referenced image must exist; batch commands
    load without the check and report missing files per record instead.
    """
    path = Path(path)
    provenance: dict = {}
    rows: list[list[str]] = []
    with open(path, newline="") as fh:
        data_lines = []
        for line in fh:
            if line.startswith("#"):
                text = line[1:].strip()
                if "=" in text:
                    key, value = text.split("=", 1)
                    provenance[key.strip()] = value.strip()
            else:
                data_lines.append(line)
        rows = list(csv.reader(data_lines))
    if not rows or rows[0] != MANIFEST_HEADER:
        raise DatasetError(f"{path}: expected header {','.join(MANIFEST_HEADER)}")
    records = []
    seen: set[str] = set()
    for row_num, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise DatasetError(f"{path}: row {row_num}: expected 4 fields")
        image_id, image_path, dx, label = row
        if image_id in seen:
            raise DatasetError(f"{path}: row {row_num}: duplicate image_id {image_id!r}")
        seen.add(image_id)
        if binary_label(dx) != label:
            raise DatasetError(
                f"{path}: row {row_num}: label {label!r} inconsistent with dx {dx!r}"
            )
        if require_files and not Path(image_path).exists():
            raise DatasetError(f"{path}: row {row_num}: missing file {image_path}")
        records.append(LesionRecord(image_id, image_path, dx, label))
    return Manifest(records=records, provenance=provenance)
