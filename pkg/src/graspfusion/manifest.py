"""Labeled dataset manifests, classifier-output sidecars, and seeded sampling.

Images themselves are out of scope; the toolkit consumes label manifests
(CSV, header ``image_id,object_name,grasp_label,split``) plus optional
per-image probability vectors (JSONL sidecar keyed by image id).

Sampling is stratified exactly and reproducible: every draw comes from a
stream derived from (master seed, purpose string), so running trials in a
different order or in parallel cannot change the outcome. Sub-manifests keep
their parent's record order, which makes serialization byte-deterministic.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateImageId,
    EmptyManifest,
    InsufficientImages,
    NotNormalized,
    SchemaViolation,
    UnknownImageId,
    UnknownLabel,
    ValidationError,
)
from .streams import derive_rng
from .taxonomy import Distribution, GraspTaxonomy, normalize_name

CSV_HEADER = ("image_id", "object_name", "grasp_label", "split")
SPLITS = ("train", "test")


@dataclass(frozen=True)
class SampleRecord:
    """One labeled image: id, object, grasp-type index, split, optional p(g|i)."""

    image_id: str
    object_name: str
    grasp_label: int
    split: str
    distribution: Distribution | None = None


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    taxonomy: GraspTaxonomy
    records: tuple[SampleRecord, ...]

    def __post_init__(self):
        seen: set[str] = set()
        k = self.taxonomy.size
        for r in self.records:
            if r.image_id in seen:
                raise DuplicateImageId(f"duplicate image_id {r.image_id!r}")
            seen.add(r.image_id)
            if not 0 <= r.grasp_label < k:
                raise UnknownLabel(f"record {r.image_id!r}: grasp index {r.grasp_label} out of range")
            if r.split not in SPLITS:
                raise SchemaViolation(f"record {r.image_id!r}: split must be train|test")
            if r.distribution is not None and len(r.distribution) != k:
                raise DimensionMismatch(
                    f"record {r.image_id!r}: distribution length {len(r.distribution)} != K={k}"
                )

    def __len__(self) -> int:
        return len(self.records)

    def object_names(self) -> tuple[str, ...]:
        """Distinct object names in first-appearance order."""
        seen: dict[str, None] = {}
        for r in self.records:
            seen.setdefault(r.object_name)
        return tuple(seen)

    def counts_by_object_grasp(self) -> dict[tuple[str, int], int]:
        counts: dict[tuple[str, int], int] = {}
        for r in self.records:
            key = (r.object_name, r.grasp_label)
            counts[key] = counts.get(key, 0) + 1
        return counts

    def per_grasp_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for r in self.records:
            counts[r.grasp_label] = counts.get(r.grasp_label, 0) + 1
        return counts

    def image_ids(self) -> tuple[str, ...]:
        return tuple(r.image_id for r in self.records)

    def missing_distribution_ids(self) -> tuple[str, ...]:
        return tuple(r.image_id for r in self.records if r.distribution is None)


def load_manifest(path: str | Path, taxonomy: GraspTaxonomy, name: str | None = None) -> DatasetManifest:
    """Read and validate a manifest CSV against a taxonomy."""
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaViolation(f"{path}: empty manifest file") from None
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise SchemaViolation(
                f"{path}:1: header must be {','.join(CSV_HEADER)!r}, got {','.join(header)!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise SchemaViolation(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            image_id, object_name, grasp_name, split = (f.strip() for f in row)
            if not image_id:
                raise SchemaViolation(f"{path}:{lineno}: empty image_id")
            if split not in SPLITS:
                raise SchemaViolation(f"{path}:{lineno}: split must be train|test, got {split!r}")
            records.append(
                SampleRecord(
                    image_id=image_id,
                    object_name=normalize_name(object_name),
                    grasp_label=taxonomy.index_of(grasp_name),
                    split=split,
                )
            )
    return DatasetManifest(name or path.stem, taxonomy, tuple(records))


def manifest_to_csv(manifest: DatasetManifest) -> str:
    """Canonical CSV form: UTF-8, LF line endings, labels as class names."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in manifest.records:
        writer.writerow(
            (r.image_id, r.object_name, manifest.taxonomy.name_of(r.grasp_label), r.split)
        )
    return buf.getvalue()


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    Path(path).write_text(manifest_to_csv(manifest), encoding="utf-8", newline="")


def load_distributions(path: str | Path, manifest: DatasetManifest) -> DatasetManifest:
    """Attach per-image probability vectors from a JSONL sidecar.

    One object per line: {"image_id": str, "p": [K reals]}. Lines starting
    with ``#`` are metadata comments. Every row must reference a manifest id;
    vectors are accepted when |sum - 1| <= 1e-6 and renormalized.
    """
    path = Path(path)
    by_id = {r.image_id: i for i, r in enumerate(manifest.records)}
    k = manifest.taxonomy.size
    attached: dict[str, Distribution] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaViolation(f"{path}:{lineno}: invalid JSON: {e}") from e
            if not isinstance(row, dict) or "image_id" not in row or "p" not in row:
                raise SchemaViolation(f'{path}:{lineno}: expected {{"image_id", "p"}} object')
            image_id = row["image_id"]
            if image_id not in by_id:
                raise UnknownImageId(f"{path}:{lineno}: image_id {image_id!r} not in manifest")
            if image_id in attached:
                raise DuplicateImageId(f"{path}:{lineno}: duplicate row for {image_id!r}")
            p = row["p"]
            if not isinstance(p, list):
                raise SchemaViolation(f"{path}:{lineno}: 'p' must be a list")
            if len(p) != k:
                raise DimensionMismatch(f"{path}:{lineno}: vector length {len(p)} != K={k}")
            try:
                attached[image_id] = Distribution.from_raw(p)
            except NotNormalized as e:
                raise NotNormalized(f"{path}:{lineno}: {e}") from e
    records = tuple(
        replace(r, distribution=attached[r.image_id]) if r.image_id in attached else r
        for r in manifest.records
    )
    return DatasetManifest(manifest.name, manifest.taxonomy, records)


def save_distributions(manifest: DatasetManifest, path: str | Path, comment: str | None = None) -> None:
    """Write attached vectors back to JSONL (one row per record that has one)."""
    lines = []
    if comment:
        lines.append(f"# {comment}")
    for r in manifest.records:
        if r.distribution is None:
            continue
        lines.append(
            json.dumps({"image_id": r.image_id, "p": r.distribution.values.tolist()})
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="")


def attach_distributions(manifest: DatasetManifest, vectors: Mapping[str, Distribution]) -> DatasetManifest:
    unknown = [i for i in vectors if i not in set(manifest.image_ids())]
    if unknown:
        raise UnknownImageId(f"ids not in manifest: {unknown[:5]}")
    records = tuple(
        replace(r, distribution=vectors[r.image_id]) if r.image_id in vectors else r
        for r in manifest.records
    )
    return DatasetManifest(manifest.name, manifest.taxonomy, records)


def _select(candidates: Sequence[SampleRecord], count: int, rng: np.random.Generator) -> list[str]:
    """First ``count`` ids of a seeded permutation of candidates (sorted by id)."""
    ids = sorted(r.image_id for r in candidates)
    perm = rng.permutation(len(ids))
    return [ids[i] for i in perm[:count]]


def nested_subsample(
    manifest: DatasetManifest, sizes: Sequence[int], seed: int
) -> list[DatasetManifest]:
    """Size-graded training subsets where each smaller set is inside every larger one.

    ``sizes`` are per-grasp-type counts, strictly ascending. Per grasp type
    one seeded permutation is drawn; the size-s subset takes its first s
    elements, which yields strict nesting by construction.
    """
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise ValidationError("sizes must be non-empty")
    if any(s <= 0 for s in sizes):
        raise ValidationError(f"sizes must be positive: {sizes}")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValidationError(f"sizes must be strictly ascending: {sizes}")
    if not manifest.records:
        raise EmptyManifest(f"manifest {manifest.name!r} has no records")

    largest = sizes[-1]
    by_grasp: dict[int, list[SampleRecord]] = {}
    for r in manifest.records:
        by_grasp.setdefault(r.grasp_label, []).append(r)

    chosen: dict[int, list[str]] = {}
    for label in sorted(by_grasp):
        candidates = by_grasp[label]
        grasp_name = manifest.taxonomy.name_of(label)
        if len(candidates) < largest:
            raise InsufficientImages(grasp_name, largest, len(candidates))
        rng = derive_rng(seed, f"train-sample/{normalize_name(grasp_name)}")
        chosen[label] = _select(candidates, largest, rng)

    subsets = []
    for size in sizes:
        selected = {i for ids in chosen.values() for i in ids[:size]}
        records = tuple(r for r in manifest.records if r.image_id in selected)
        subsets.append(DatasetManifest(f"{manifest.name}-n{size}", manifest.taxonomy, records))
    return subsets


def test_sample(
    manifest: DatasetManifest,
    per_stratum: int,
    seed: int,
    trial: int | None = None,
    by: str = "object",
) -> DatasetManifest:
    """Uniform without-replacement sample of ``per_stratum`` records per stratum.

    ``by="object"`` stratifies on object name (the comparison protocol);
    ``by="grasp"`` stratifies on grasp type (the dataset-size protocol). The
    stream purpose is ``test-sample`` or ``test-sample/<trial>``.
    """
    if by not in ("object", "grasp"):
        raise ValidationError(f"by must be object|grasp, got {by!r}")
    if per_stratum <= 0:
        raise ValidationError(f"per_stratum must be positive, got {per_stratum}")
    if not manifest.records:
        raise EmptyManifest(f"manifest {manifest.name!r} has no records")

    strata: dict[str, list[SampleRecord]] = {}
    for r in manifest.records:
        key = r.object_name if by == "object" else manifest.taxonomy.name_of(r.grasp_label)
        strata.setdefault(key, []).append(r)

    purpose = "test-sample" if trial is None else f"test-sample/{trial}"
    rng = derive_rng(seed, purpose)
    selected: set[str] = set()
    for key in sorted(strata):
        candidates = strata[key]
        if len(candidates) < per_stratum:
            raise InsufficientImages(key, per_stratum, len(candidates))
        selected.update(_select(candidates, per_stratum, rng))

    records = tuple(r for r in manifest.records if r.image_id in selected)
    suffix = "test" if trial is None else f"test{trial}"
    return DatasetManifest(f"{manifest.name}-{suffix}", manifest.taxonomy, records)
