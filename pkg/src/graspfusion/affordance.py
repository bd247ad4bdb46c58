"""Per-object grasp-type priors: building, flattening, lookup, and file I/O.

A varied affordance is the normalized histogram of grasp labels observed for
an object; a uniform affordance flattens the non-zero entries, keeping only
the support. Lookups match object names exactly after normalization (fuzzy
matching is out of scope).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyManifest,
    ObjectNotFound,
    SchemaViolation,
    UnknownLabel,
)
from .taxonomy import (
    Distribution,
    GraspTaxonomy,
    normalize,
    normalize_name,
    taxonomy_from_dict,
    taxonomy_to_dict,
)

UNIFORM_EQUAL_ATOL = 1e-12

KIND_VARIED = "varied"
KIND_UNIFORM = "uniform"


@dataclass(frozen=True)
class AffordanceVector:
    """One object's prior over grasp types, varied or uniform."""

    object_name: str
    values: Distribution
    kind: str

    def __post_init__(self):
        if self.kind not in (KIND_VARIED, KIND_UNIFORM):
            raise SchemaViolation(f"affordance kind must be varied|uniform, got {self.kind!r}")
        object.__setattr__(self, "object_name", normalize_name(self.object_name))
        nz = self.values.values[self.values.values > 0]
        if nz.size == 0:
            raise SchemaViolation(f"affordance for {self.object_name!r} has empty support")
        if self.kind == KIND_UNIFORM and np.ptp(nz) > UNIFORM_EQUAL_ATOL:
            raise SchemaViolation(
                f"uniform affordance for {self.object_name!r} has unequal non-zero entries"
            )

    @property
    def support(self) -> np.ndarray:
        return self.values.support


@dataclass(frozen=True)
class AffordanceDatabase:
    """Immutable map from normalized object name to affordance vector."""

    taxonomy: GraspTaxonomy
    entries: Mapping[str, AffordanceVector]
    kind: str

    def __post_init__(self):
        if self.kind not in (KIND_VARIED, KIND_UNIFORM):
            raise SchemaViolation(f"database kind must be varied|uniform, got {self.kind!r}")
        entries = dict(sorted(self.entries.items()))
        k = self.taxonomy.size
        for name, vec in entries.items():
            if name != vec.object_name:
                raise SchemaViolation(f"entry key {name!r} != vector name {vec.object_name!r}")
            if len(vec.values) != k:
                raise DimensionMismatch(
                    f"entry {name!r} has length {len(vec.values)}, taxonomy K={k}"
                )
            if vec.kind != self.kind:
                raise SchemaViolation(f"entry {name!r} kind {vec.kind!r} != database {self.kind!r}")
        object.__setattr__(self, "entries", MappingProxyType(entries))

    @property
    def n_objects(self) -> int:
        return len(self.entries)

    def object_names(self) -> tuple[str, ...]:
        return tuple(self.entries)

    def lookup(self, object_name: str, fallback_uniform: bool = False) -> AffordanceVector:
        """Entry whose normalized name equals the normalized query.

        Unknown objects raise ``ObjectNotFound`` unless ``fallback_uniform``
        is set, in which case a uniform vector over all K classes is returned
        (opt-in, never silent by default; evaluation bugs should surface).
        """
        query = normalize_name(object_name)
        entry = self.entries.get(query)
        if entry is not None:
            return entry
        if fallback_uniform:
            k = self.taxonomy.size
            return AffordanceVector(query, Distribution(np.full(k, 1.0 / k)), KIND_UNIFORM)
        raise ObjectNotFound(query)

    def __contains__(self, object_name: str) -> bool:
        return normalize_name(object_name) in self.entries


def build_varied_from_labels(
    pairs: Iterable[tuple[str, int]], taxonomy: GraspTaxonomy
) -> AffordanceDatabase:
    """Varied database from (object name, grasp index) pairs.

    Each entry is count(object, g) / count(object); the support is exactly
    the set of grasp types observed for that object.
    """
    k = taxonomy.size
    counts: dict[str, np.ndarray] = {}
    n = 0
    for object_name, label in pairs:
        n += 1
        label = int(label)
        if not 0 <= label < k:
            raise UnknownLabel(f"grasp index {label} out of range for K={k}")
        name = normalize_name(object_name)
        if name not in counts:
            counts[name] = np.zeros(k)
        counts[name][label] += 1
    if n == 0:
        raise EmptyManifest("cannot build an affordance database from zero records")
    entries = {
        name: AffordanceVector(name, normalize(c), KIND_VARIED) for name, c in counts.items()
    }
    return AffordanceDatabase(taxonomy, entries, KIND_VARIED)


def build_varied(manifest, taxonomy: GraspTaxonomy | None = None) -> AffordanceDatabase:
    """Varied database from a dataset manifest (normalized label histograms).

    When ``taxonomy`` differs from the manifest's, labels are remapped by
    name; a label missing from the target taxonomy raises ``UnknownLabel``.
    """
    target = taxonomy or manifest.taxonomy
    if not manifest.records:
        raise EmptyManifest(f"manifest {manifest.name!r} has no records")
    if target is manifest.taxonomy or target.classes == manifest.taxonomy.classes:
        pairs = ((r.object_name, r.grasp_label) for r in manifest.records)
    else:
        pairs = (
            (r.object_name, target.index_of(manifest.taxonomy.name_of(r.grasp_label)))
            for r in manifest.records
        )
    return build_varied_from_labels(pairs, target)


def to_uniform(db: AffordanceDatabase) -> AffordanceDatabase:
    """Flatten non-zero entries to 1/m on the support; idempotent."""
    entries = {}
    for name, vec in db.entries.items():
        support = vec.support
        values = np.zeros(db.taxonomy.size)
        values[support] = 1.0 / support.size
        entries[name] = AffordanceVector(name, Distribution(values), KIND_UNIFORM)
    return AffordanceDatabase(db.taxonomy, entries, KIND_UNIFORM)


def db_to_dict(db: AffordanceDatabase) -> dict:
    return {
        "taxonomy": taxonomy_to_dict(db.taxonomy),
        "kind": db.kind,
        "objects": {name: vec.values.values.tolist() for name, vec in db.entries.items()},
    }


def save_db(db: AffordanceDatabase, path: str | Path) -> None:
    """Write the database as human-editable JSON (full round-trip precision)."""
    Path(path).write_text(
        json.dumps(db_to_dict(db), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def db_from_dict(data, where: str = "<memory>") -> AffordanceDatabase:
    if not isinstance(data, dict):
        raise SchemaViolation(f"affordance database must be a JSON object: {where}")
    for key in ("taxonomy", "kind", "objects"):
        if key not in data:
            raise SchemaViolation(f"affordance database missing key {key!r}: {where}")
    taxonomy = taxonomy_from_dict(data["taxonomy"], where=where)
    kind = data["kind"]
    if kind not in (KIND_VARIED, KIND_UNIFORM):
        raise SchemaViolation(f"kind must be varied|uniform, got {kind!r}: {where}")
    objects = data["objects"]
    if not isinstance(objects, dict):
        raise SchemaViolation(f"'objects' must be an object: {where}")
    entries = {}
    for name, values in objects.items():
        if not isinstance(values, list):
            raise SchemaViolation(f"objects[{name!r}] must be a list: {where}")
        if len(values) != taxonomy.size:
            raise DimensionMismatch(
                f"objects[{name!r}] has length {len(values)}, taxonomy K={taxonomy.size}"
            )
        norm = normalize_name(name)
        entries[norm] = AffordanceVector(norm, Distribution.from_raw(values), kind)
    return AffordanceDatabase(taxonomy, entries, kind)


def load_db(path: str | Path) -> AffordanceDatabase:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaViolation(f"affordance database is not valid JSON: {path}: {e}") from e
    return db_from_dict(data, where=str(path))


def validate_db(db: AffordanceDatabase) -> list[str]:
    """Re-check database invariants; returns problems (empty = clean).

    Exists for the manual-edit path: the JSON file is meant to be edited by
    hand, so a validation pass after loading catches drifted values.
    """
    problems = []
    for name, vec in db.entries.items():
        v = vec.values.values
        total = float(v.sum())
        if abs(total - 1.0) > 1e-9:
            problems.append(f"{name}: entries sum to {total!r}")
        nz = v[v > 0]
        if nz.size == 0:
            problems.append(f"{name}: empty support")
        if db.kind == KIND_UNIFORM and nz.size and float(np.ptp(nz)) > UNIFORM_EQUAL_ATOL:
            problems.append(f"{name}: uniform entry has unequal non-zero values")
    return problems
