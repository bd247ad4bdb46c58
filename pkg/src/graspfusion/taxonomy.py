"""Grasp-type class space and the probability-vector primitive shared everywhere.

A :class:`GraspTaxonomy` is an ordered, named set of grasp-type classes; the
order is part of the contract because argmax ties break toward the lowest
index. A :class:`Distribution` is a validated probability vector over those
classes.

Tolerances: vectors read from files are accepted when their sum is within
``LOAD_SUM_TOLERANCE`` of 1 and then renormalized; after construction every
Distribution sums to 1 within ``NORMALIZED_ATOL``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    AllZero,
    DimensionMismatch,
    NegativeEntry,
    NotNormalized,
    SchemaViolation,
    UnknownLabel,
)

LOAD_SUM_TOLERANCE = 1e-6
NORMALIZED_ATOL = 1e-9

DEFAULT_TAXONOMY_FILE = "feix13.json"


def normalize_name(name: str) -> str:
    """Case-fold, trim, and collapse internal whitespace runs to one space."""
    return " ".join(str(name).split()).casefold()


@dataclass(frozen=True)
class GraspTaxonomy:
    """Ordered grasp-type classes; index = position in ``classes``.

    Class names must be unique after normalization and there must be at
    least two classes. Instances are immutable and safe to share.
    """

    classes: tuple[str, ...]
    version: str = "unversioned"
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        classes = tuple(str(c) for c in self.classes)
        if len(classes) < 2:
            raise SchemaViolation(f"taxonomy needs at least 2 classes, got {len(classes)}")
        normalized = [normalize_name(c) for c in classes]
        if any(not n for n in normalized):
            raise SchemaViolation("taxonomy class names must be non-empty")
        if len(set(normalized)) != len(normalized):
            dupes = sorted({n for n in normalized if normalized.count(n) > 1})
            raise SchemaViolation(f"duplicate class names after normalization: {dupes}")
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(normalized)})

    @property
    def size(self) -> int:
        return len(self.classes)

    def __len__(self) -> int:
        return len(self.classes)

    def __contains__(self, name: str) -> bool:
        return normalize_name(name) in self._index

    def index_of(self, name: str) -> int:
        """Index of a class by name (normalized match)."""
        try:
            return self._index[normalize_name(name)]
        except KeyError:
            raise UnknownLabel(
                f"grasp type {name!r} not in taxonomy {self.version!r}"
            ) from None

    def name_of(self, index: int) -> str:
        if not 0 <= index < len(self.classes):
            raise UnknownLabel(f"class index {index} out of range for K={len(self.classes)}")
        return self.classes[index]

    def subset(self, drop: list[str] | tuple[str, ...], version: str | None = None) -> "GraspTaxonomy":
        """New taxonomy without the dropped classes, preserving relative order."""
        dropped = {normalize_name(d) for d in drop}
        unknown = dropped - set(self._index)
        if unknown:
            raise UnknownLabel(f"cannot drop unknown classes: {sorted(unknown)}")
        keep = tuple(c for c in self.classes if normalize_name(c) not in dropped)
        return GraspTaxonomy(keep, version or f"{self.version}-reduced")


@dataclass(frozen=True)
class Distribution:
    """Probability vector over the taxonomy classes.

    Entries are non-negative and sum to 1 within ``NORMALIZED_ATOL``. The
    backing array is read-only; treat instances as values.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise DimensionMismatch(f"distribution must be 1-D, got shape {values.shape}")
        if values.size < 1:
            raise DimensionMismatch("distribution must be non-empty")
        if np.any(values < 0):
            raise NegativeEntry(f"negative entries at {np.flatnonzero(values < 0).tolist()}")
        total = float(values.sum())
        if abs(total - 1.0) > NORMALIZED_ATOL:
            raise NotNormalized(f"entries sum to {total!r}, expected 1 within {NORMALIZED_ATOL}")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_raw(cls, values, tol: float = LOAD_SUM_TOLERANCE) -> "Distribution":
        """Accept a vector whose sum is within ``tol`` of 1, then renormalize.

        This is the load-time path: it absorbs float/text round-trip error
        without hiding corrupt data (anything further off than ``tol`` is
        rejected).
        """
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1:
            raise DimensionMismatch(f"distribution must be 1-D, got shape {arr.shape}")
        if np.any(arr < 0):
            raise NegativeEntry(f"negative entries at {np.flatnonzero(arr < 0).tolist()}")
        total = float(arr.sum())
        if abs(total - 1.0) > tol:
            raise NotNormalized(f"entries sum to {total!r}, expected 1 within {tol}")
        return normalize(arr)

    def __len__(self) -> int:
        return int(self.values.size)

    def __getitem__(self, i: int) -> float:
        return float(self.values[i])

    @property
    def support(self) -> np.ndarray:
        """Indices with strictly positive probability."""
        return np.flatnonzero(self.values > 0)


NORMALIZE_FIXED_POINT_ATOL = 1e-12


def normalize(values, k: int | None = None) -> Distribution:
    """Scale a non-negative vector so it sums to 1 within 1e-12.

    Relative proportions are preserved. A vector already summing to 1 within
    1e-12 passes through unchanged, which is what makes normalize bit-for-bit
    idempotent: one division leaves the sum within a few ulp of 1, so a
    second call is the identity. Raises ``AllZero`` if every entry is zero,
    ``NegativeEntry`` on any negative entry, and ``DimensionMismatch`` when
    ``k`` is given and the length differs.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected 1-D vector, got shape {arr.shape}")
    if k is not None and arr.size != k:
        raise DimensionMismatch(f"expected length {k}, got {arr.size}")
    if np.any(arr < 0):
        raise NegativeEntry(f"negative entries at {np.flatnonzero(arr < 0).tolist()}")
    total = float(arr.sum())
    if total == 0.0:
        raise AllZero("cannot normalize an all-zero vector")
    if abs(total - 1.0) <= NORMALIZE_FIXED_POINT_ATOL:
        return Distribution(arr)
    return Distribution(arr / total)


def argmax(d: Distribution | np.ndarray) -> int:
    """Lowest index attaining the maximum value (deterministic tie-break)."""
    values = d.values if isinstance(d, Distribution) else np.asarray(d)
    return int(np.argmax(values))


def load_taxonomy(path: str | Path) -> GraspTaxonomy:
    """Read a taxonomy JSON file: {"version": str, "classes": [str, ...]}."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaViolation(f"taxonomy file is not valid JSON: {path}: {e}") from e
    return taxonomy_from_dict(data, where=str(path))


def taxonomy_from_dict(data, where: str = "<memory>") -> GraspTaxonomy:
    if not isinstance(data, dict):
        raise SchemaViolation(f"taxonomy must be a JSON object: {where}")
    classes = data.get("classes")
    if not isinstance(classes, list) or not all(isinstance(c, str) for c in classes):
        raise SchemaViolation(f"taxonomy 'classes' must be a list of strings: {where}")
    version = data.get("version", "unversioned")
    if not isinstance(version, str):
        raise SchemaViolation(f"taxonomy 'version' must be a string: {where}")
    return GraspTaxonomy(tuple(classes), version)


def taxonomy_to_dict(taxonomy: GraspTaxonomy) -> dict:
    return {"version": taxonomy.version, "classes": list(taxonomy.classes)}


def save_taxonomy(taxonomy: GraspTaxonomy, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(taxonomy_to_dict(taxonomy), indent=2) + "\n", encoding="utf-8"
    )


def default_taxonomy() -> GraspTaxonomy:
    """The bundled 13-class taxonomy.

    The class list is a reconstruction (the original selection is published
    only as a figure); swap in your own file via ``load_taxonomy`` wherever a
    taxonomy is accepted.
    """
    text = resources.files("graspfusion.data").joinpath(DEFAULT_TAXONOMY_FILE).read_text("utf-8")
    return taxonomy_from_dict(json.loads(text), where=DEFAULT_TAXONOMY_FILE)
