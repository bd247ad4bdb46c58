"""Synthetic benchmark worlds: objects, supports, and label manifests.

The default world pairs the bundled 13-class taxonomy with 21 household
objects and hand-assigned grasp supports (two of them single-grasp, matching
the shape of the real data this stands in for). Manifests generated from a
world have exact stratified counts, so the varied affordance built from a
train manifest reproduces the designed histograms.

Scenario files turn the second evaluation setting into configuration rather
than code: a scenario names a preset, classes to exclude, and objects to
exclude, plus trial counts. ``graded_supports`` produces worlds whose
affordance skew is controlled by a single parameter, used to probe how the
benefit of varied affordance scales with heterogeneity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import SchemaViolation, UnknownLabel, ValidationError
from .manifest import DatasetManifest, SampleRecord
from .streams import derive_rng
from .taxonomy import GraspTaxonomy, default_taxonomy, normalize_name

# object -> {grasp name: integer weight}; weights are histogram proportions.
# Hand-assigned and synthetic; each object has one clearly dominant grasp
# (people mostly grab a mug by the body, not the rim), and two objects are
# single-grasp: pitcher, cooking skillet.
DEFAULT_SUPPORTS: dict[str, dict[str, int]] = {
    "chip can": {"large diameter": 10, "medium wrap": 2, "fixed hook": 1},
    "cracker box": {"large diameter": 8, "medium wrap": 1, "parallel extension": 2, "fixed hook": 1},
    "gelatin box": {"palmar pinch": 8, "parallel extension": 1, "lateral": 2, "tripod": 1},
    "potted meat can": {"medium wrap": 7, "large diameter": 1, "palmar pinch": 2},
    "apple": {"power sphere": 8, "precision sphere": 1, "sphere 4 finger": 2, "tripod": 1},
    "banana": {"small diameter": 7, "medium wrap": 2, "lateral": 1, "tip pinch": 1},
    "peach": {"power sphere": 7, "precision sphere": 1, "sphere 4 finger": 2},
    "pear": {"power sphere": 6, "precision sphere": 1, "tripod": 2, "quadpod": 1},
    "pitcher": {"large diameter": 1},
    "bleach cleanser": {"large diameter": 7, "medium wrap": 1, "small diameter": 2},
    "glass cleaner": {"small diameter": 7, "medium wrap": 2, "large diameter": 1},
    "wine glass": {"small diameter": 6, "power sphere": 2, "precision sphere": 1},
    "metal bowl": {"precision sphere": 7, "sphere 4 finger": 1, "fixed hook": 2, "lateral": 1},
    "mug": {"medium wrap": 8, "fixed hook": 1, "small diameter": 2, "large diameter": 1},
    "abrasive sponge": {"palmar pinch": 7, "parallel extension": 1, "tripod": 2},
    "cooking skillet": {"medium wrap": 1},
    "plate": {"parallel extension": 7, "lateral": 2, "palmar pinch": 1},
    "fork": {"small diameter": 7, "lateral": 1, "tip pinch": 2, "tripod": 1},
    "spoon": {"small diameter": 6, "lateral": 1, "tripod": 2, "tip pinch": 1},
    "knife": {"small diameter": 8, "lateral": 1, "tip pinch": 2},
    "spatula": {"small diameter": 6, "medium wrap": 2, "lateral": 1, "tripod": 1},
}


@dataclass(frozen=True)
class ScenarioConfig:
    """One evaluation setting: preset + exclusions + protocol sizes."""

    name: str
    preset: str
    exclude_grasps: tuple[str, ...] = ()
    exclude_objects: tuple[str, ...] = ()
    trials: int = 100
    records_per_object: int = 100
    pool_per_object: int = 250
    train_per_object: int = 200


SCENARIO_FILES = {"scenario1": "scenario1.json", "scenario2": "scenario2.json"}


def load_scenario(source: str | Path) -> ScenarioConfig:
    """Load a scenario by bundled name (``scenario1``/``scenario2``) or path."""
    key = str(source)
    if key in SCENARIO_FILES:
        text = resources.files("graspfusion.data").joinpath(SCENARIO_FILES[key]).read_text("utf-8")
        where = SCENARIO_FILES[key]
    else:
        path = Path(source)
        text = path.read_text(encoding="utf-8")
        where = str(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaViolation(f"scenario file is not valid JSON: {where}: {e}") from e
    if not isinstance(data, dict) or "name" not in data or "preset" not in data:
        raise SchemaViolation(f"scenario must be an object with 'name' and 'preset': {where}")
    return ScenarioConfig(
        name=str(data["name"]),
        preset=str(data["preset"]),
        exclude_grasps=tuple(data.get("exclude_grasps", ())),
        exclude_objects=tuple(data.get("exclude_objects", ())),
        trials=int(data.get("trials", 100)),
        records_per_object=int(data.get("records_per_object", 100)),
        pool_per_object=int(data.get("pool_per_object", 250)),
        train_per_object=int(data.get("train_per_object", 200)),
    )


def scenario_world(
    config: ScenarioConfig, taxonomy: GraspTaxonomy | None = None
) -> tuple[GraspTaxonomy, dict[str, dict[str, int]]]:
    """Apply a scenario's exclusions to the default world."""
    base = taxonomy or default_taxonomy()
    reduced = base.subset(config.exclude_grasps) if config.exclude_grasps else base
    dropped_objects = {normalize_name(o) for o in config.exclude_objects}
    dropped_grasps = {normalize_name(g) for g in config.exclude_grasps}
    supports: dict[str, dict[str, int]] = {}
    for obj, weights in DEFAULT_SUPPORTS.items():
        if normalize_name(obj) in dropped_objects:
            continue
        keep = {g: w for g, w in weights.items() if normalize_name(g) not in dropped_grasps}
        if not keep:
            raise ValidationError(f"object {obj!r} has no grasps left after exclusions")
        supports[obj] = keep
    return reduced, supports


def _apportion(total: int, weights: list[int]) -> list[int]:
    """Split ``total`` proportionally to integer weights (largest remainder)."""
    weight_sum = sum(weights)
    raw = [total * w / weight_sum for w in weights]
    counts = [int(x) for x in raw]
    remainders = sorted(range(len(raw)), key=lambda i: (raw[i] - counts[i], -i), reverse=True)
    for i in remainders[: total - sum(counts)]:
        counts[i] += 1
    return counts


def build_manifest(
    taxonomy: GraspTaxonomy,
    supports: dict[str, dict[str, int]],
    images_per_object: int,
    name: str,
    split: str = "test",
) -> DatasetManifest:
    """Deterministic manifest with per-object counts apportioned to the weights.

    Image ids are ``<object>-<grasp>-<serial>`` with spaces dashed, so two
    manifests built from the same world never collide if their names differ
    (ids embed the manifest name).
    """
    records = []
    for obj in sorted(supports, key=normalize_name):
        weights = supports[obj]
        grasps = sorted(weights, key=lambda g: taxonomy.index_of(g))
        for grasp_name in grasps:
            if grasp_name not in taxonomy:
                raise UnknownLabel(f"support grasp {grasp_name!r} not in taxonomy")
        counts = _apportion(images_per_object, [weights[g] for g in grasps])
        obj_slug = normalize_name(obj).replace(" ", "-")
        for grasp_name, count in zip(grasps, counts):
            grasp_slug = normalize_name(grasp_name).replace(" ", "-")
            label = taxonomy.index_of(grasp_name)
            for i in range(count):
                records.append(
                    SampleRecord(
                        image_id=f"{name}-{obj_slug}-{grasp_slug}-{i:04d}",
                        object_name=normalize_name(obj),
                        grasp_label=label,
                        split=split,
                    )
                )
    return DatasetManifest(name, taxonomy, tuple(records))


def build_manifest_min_per_grasp(
    taxonomy: GraspTaxonomy,
    supports: dict[str, dict[str, int]],
    min_per_grasp: int,
    name: str,
    split: str = "test",
) -> DatasetManifest:
    """Manifest sized so every grasp type present reaches ``min_per_grasp``.

    Grows the per-object count geometrically; grasp types concentrated in a
    single low-weight support need disproportionately large objects.
    """
    per_object = max(min_per_grasp, 1)
    for _ in range(24):
        manifest = build_manifest(taxonomy, supports, per_object, name, split)
        if min(manifest.per_grasp_counts().values()) >= min_per_grasp:
            return manifest
        per_object *= 2
    raise ValidationError(
        f"could not reach {min_per_grasp} records per grasp type; check support weights"
    )


def graded_supports(
    taxonomy: GraspTaxonomy,
    n_objects: int,
    skew: float,
    seed: int,
    min_support: int = 3,
    max_support: int = 6,
    weight_scale: int = 1000,
) -> dict[str, dict[str, int]]:
    """Random supports whose histogram skew is graded by one parameter.

    ``skew=0`` gives equal weights on every support (heterogeneity 0); larger
    values concentrate mass on each object's first grasp geometrically.
    Supports are contiguous runs of classes, which keeps the preset models'
    near-neighbor confusions partly inside the support.
    """
    if skew < 0:
        raise ValidationError(f"skew must be >= 0, got {skew}")
    k = taxonomy.size
    if max_support > k:
        raise ValidationError(f"max_support {max_support} exceeds K={k}")
    rng = derive_rng(seed, f"graded-supports/{skew!r}/{n_objects}")
    supports: dict[str, dict[str, int]] = {}
    for i in range(n_objects):
        size = int(rng.integers(min_support, max_support + 1))
        start = int(rng.integers(0, k))
        classes = [(start + j) % k for j in range(size)]
        weights = {}
        for rank, cls in enumerate(classes):
            w = int(round(weight_scale * np.exp(-skew * rank)))
            weights[taxonomy.name_of(cls)] = max(w, 1)
        supports[f"object-{i:02d}"] = weights
    return supports
