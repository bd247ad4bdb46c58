"""Synthetic stand-in for a trained image classifier.

A :class:`ConfusionModel` says where probability mass goes in expectation:
the true class receives ``accuracy``; the rest spreads over that class's
confusable classes (or uniformly over all others when none are listed).

Per-image draw (fixed per release). Each image is either clean or hard:

- hard, with probability ``hard_confusion_rate``: one confusable class c is
  picked proportionally to its weight and the draw centers on a corrupted
  mean with ``hard_mass`` on c and the rest on the true class. This is the
  confident-wrong failure mode of real classifiers (occlusion, look-alike
  grasps); argmax accuracy can sit below ``accuracy`` because of it.
- clean otherwise: the draw centers on the mean rescaled so that the overall
  expectation over both branches is exactly the model mean.

Given the branch mean m, the sample is Dirichlet-style:

    shapes = concentration * m + EPSILON
    draws  = Gamma(shape=shapes, scale=1), independently per class
    output = draws / sum(draws)

``EPSILON`` keeps zero-mean classes effectively excluded while nothing ever
divides by zero. Outputs are valid probability vectors by construction, and
their expectation matches ``mean_vector`` regardless of the mixture split.

All outputs are synthetic. Presets target the qualitative behavior of a real
and a mimed-image classifier (lower accuracy, sphere-type confusion), not
any measured accuracy values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import DimensionMismatch, SchemaViolation, UnknownPreset, ValidationError
from .manifest import DatasetManifest, SampleRecord, attach_distributions
from .streams import derive_rng
from .taxonomy import Distribution, GraspTaxonomy, normalize

EPSILON = 1e-6

PRESET_REAL = "real_objects"
PRESET_MIMED = "mimed"
PRESETS = (PRESET_REAL, PRESET_MIMED)

# Preset shape: per class, half the residual mass goes to a visually similar
# sibling grasp (usually inside an object's support) and half to a class K//2
# away (rarely inside). The mimed preset drops accuracy, confuses harder, and
# concentrates the sphere pair's residual on each other.
REAL_ACCURACY = 0.65
REAL_CONCENTRATION = 4.0
REAL_HARD_RATE = 0.40
MIMED_ACCURACY = 0.45
MIMED_CONCENTRATION = 3.0
MIMED_HARD_RATE = 0.50
HARD_MASS = 0.80
SPHERE_CLASSES = ("power sphere", "precision sphere")
SPHERE_CONFUSION = 0.7

# look-alike grasp pairs for the bundled taxonomy; unknown names fall back to
# the adjacent class
SIBLING_GRASPS = {
    "large diameter": "medium wrap",
    "small diameter": "lateral",
    "medium wrap": "large diameter",
    "power sphere": "precision sphere",
    "precision sphere": "power sphere",
    "palmar pinch": "parallel extension",
    "tip pinch": "lateral",
    "lateral": "small diameter",
    "tripod": "lateral",
    "fixed hook": "medium wrap",
    "sphere 4 finger": "precision sphere",
    "quadpod": "precision sphere",
    "parallel extension": "palmar pinch",
}


@dataclass(frozen=True)
class ConfusionModel:
    """Parameterized error model emitting plausible classifier distributions."""

    taxonomy_size: int
    accuracy: float
    confusable: Mapping[int, tuple[tuple[int, float], ...]]
    concentration: float
    name: str = "custom"
    hard_confusion_rate: float = 0.0
    hard_mass: float = 0.85

    def __post_init__(self):
        k = self.taxonomy_size
        if k < 2:
            raise ValidationError(f"taxonomy_size must be >= 2, got {k}")
        if not 0.0 < self.accuracy <= 1.0:
            raise ValidationError(f"accuracy must be in (0, 1], got {self.accuracy}")
        if self.concentration <= 0:
            raise ValidationError(f"concentration must be > 0, got {self.concentration}")
        if not 0.0 <= self.hard_confusion_rate < 1.0:
            raise ValidationError(
                f"hard_confusion_rate must be in [0, 1), got {self.hard_confusion_rate}"
            )
        if not 0.5 <= self.hard_mass <= 1.0:
            raise ValidationError(f"hard_mass must be in [0.5, 1], got {self.hard_mass}")
        clean = self._clean_accuracy()
        if not 0.0 < clean <= 1.0:
            raise ValidationError(
                "infeasible mixture: clean-branch accuracy "
                f"{clean!r} outside (0, 1]; lower hard_confusion_rate or hard_mass"
            )
        table = {}
        for cls, targets in self.confusable.items():
            cls = int(cls)
            if not 0 <= cls < k:
                raise ValidationError(f"confusable class {cls} out of range")
            targets = tuple((int(t), float(w)) for t, w in targets)
            weight_sum = 0.0
            for target, weight in targets:
                if target == cls:
                    raise ValidationError(f"class {cls} lists itself as confusable")
                if not 0 <= target < k:
                    raise ValidationError(f"confusable target {target} out of range")
                if weight < 0:
                    raise ValidationError(f"negative confusable weight for class {cls}")
                weight_sum += weight
            if targets and abs(weight_sum - 1.0) > 1e-9:
                raise ValidationError(
                    f"confusable weights for class {cls} sum to {weight_sum!r}, expected 1"
                )
            table[cls] = targets
        object.__setattr__(self, "confusable", MappingProxyType(table))

    def _clean_accuracy(self) -> float:
        """True-class mass on the clean branch so the mixture's mean is exact."""
        rate = self.hard_confusion_rate
        if rate == 0.0:
            return self.accuracy
        return (self.accuracy - rate * (1.0 - self.hard_mass)) / (1.0 - rate)

    def _residual_weights(self, true_class: int) -> tuple[tuple[int, float], ...]:
        targets = self.confusable.get(true_class, ())
        if targets:
            return targets
        k = self.taxonomy_size
        return tuple((c, 1.0 / (k - 1)) for c in range(k) if c != true_class)

    def mean_vector(self, true_class: int) -> np.ndarray:
        """Expected output for an image whose true class is ``true_class``."""
        k = self.taxonomy_size
        if not 0 <= true_class < k:
            raise DimensionMismatch(f"true class {true_class} out of range for K={k}")
        mean = np.zeros(k)
        mean[true_class] = self.accuracy
        residual = 1.0 - self.accuracy
        if residual > 0:
            for target, weight in self._residual_weights(true_class):
                mean[target] += residual * weight
        return mean


def simulate(record: SampleRecord, model: ConfusionModel, rng: np.random.Generator) -> Distribution:
    """Draw one plausible classifier output for a labeled record."""
    true = record.grasp_label
    k = model.taxonomy_size
    if not 0 <= true < k:
        raise DimensionMismatch(f"true class {true} out of range for K={k}")

    hard = model.hard_confusion_rate > 0.0 and float(rng.random()) < model.hard_confusion_rate
    mean = np.zeros(k)
    if hard:
        targets = model._residual_weights(true)
        weights = np.array([w for _, w in targets])
        pick = targets[int(rng.choice(len(targets), p=weights / weights.sum()))][0]
        mean[pick] = model.hard_mass
        mean[true] = 1.0 - model.hard_mass
    else:
        clean = model._clean_accuracy()
        mean[true] = clean
        residual = 1.0 - clean
        if residual > 0:
            for target, weight in model._residual_weights(true):
                mean[target] += residual * weight
    shapes = model.concentration * mean + EPSILON
    draws = rng.gamma(shape=shapes)
    return normalize(draws)


def simulate_manifest(
    manifest: DatasetManifest,
    model: ConfusionModel,
    master_seed: int,
    namespace: str = "",
) -> DatasetManifest:
    """Attach a simulated distribution to every record.

    Streams derive per image id (``simulate/<namespace>/<image_id>``), so any
    evaluation order, or subsequent sub-sampling, sees identical vectors.
    ``namespace`` keeps draws distinct when the same images are simulated
    under different models (e.g. per training size).
    """
    if model.taxonomy_size != manifest.taxonomy.size:
        raise DimensionMismatch(
            f"model K={model.taxonomy_size}, manifest taxonomy K={manifest.taxonomy.size}"
        )
    prefix = f"simulate/{namespace}/" if namespace else "simulate/"
    vectors = {
        r.image_id: simulate(r, model, derive_rng(master_seed, prefix + r.image_id))
        for r in manifest.records
    }
    return attach_distributions(manifest, vectors)


def _sibling_index(taxonomy: GraspTaxonomy, j: int) -> int:
    sibling_name = SIBLING_GRASPS.get(taxonomy.name_of(j))
    if sibling_name is not None and sibling_name in taxonomy:
        return taxonomy.index_of(sibling_name)
    return (j + 1) % taxonomy.size


def scenario_preset(name: str, taxonomy: GraspTaxonomy) -> ConfusionModel:
    """Built-in confusion models for the two evaluation scenarios.

    ``real_objects`` mimics a classifier trained and tested on real grasping
    images; ``mimed`` is weaker overall and struggles to tell the two sphere
    grasps apart. Both need the taxonomy because confusable classes are
    concrete indices.
    """
    if name not in PRESETS:
        raise UnknownPreset(f"unknown preset {name!r}; expected one of {PRESETS}")
    k = taxonomy.size
    far = k // 2
    confusable = {}
    for j in range(k):
        sibling = _sibling_index(taxonomy, j)
        distant = (j + far) % k
        if distant in (j, sibling):
            distant = (distant + 1) % k
        confusable[j] = ((sibling, 0.5), (distant, 0.5))
    if name == PRESET_REAL:
        return ConfusionModel(
            k, REAL_ACCURACY, confusable, REAL_CONCENTRATION, name,
            hard_confusion_rate=REAL_HARD_RATE, hard_mass=HARD_MASS,
        )

    sphere = [taxonomy.index_of(c) for c in SPHERE_CLASSES if c in taxonomy]
    if len(sphere) == 2:
        a, b = sphere
        confusable[a] = ((b, SPHERE_CONFUSION), ((a + far) % k, 1.0 - SPHERE_CONFUSION))
        confusable[b] = ((a, SPHERE_CONFUSION), ((b + far) % k, 1.0 - SPHERE_CONFUSION))
    return ConfusionModel(
        k, MIMED_ACCURACY, confusable, MIMED_CONCENTRATION, name,
        hard_confusion_rate=MIMED_HARD_RATE, hard_mass=HARD_MASS,
    )


def size_graded_accuracy(n_per_class: int, floor: float = 0.30, ceiling: float = 0.67, scale: float = 150.0) -> float:
    """Accuracy for a classifier trained on n images per class.

    Rises with n and converges above ~500 images per class; purely a desk
    scale stand-in for retraining at each size.
    """
    if n_per_class <= 0:
        raise ValidationError(f"n_per_class must be positive, got {n_per_class}")
    return ceiling - (ceiling - floor) * math.exp(-n_per_class / scale)


def model_for_size(base: ConfusionModel, n_per_class: int) -> ConfusionModel:
    """Base model re-graded for a training-set size.

    Accuracy follows :func:`size_graded_accuracy`; the hard-confusion rate
    scales with the remaining error mass, so better-trained models are
    confidently wrong less often. Feasibility is preserved: if the base
    model validates, every size-graded variant does.
    """
    acc = size_graded_accuracy(n_per_class)
    rate = base.hard_confusion_rate * (1.0 - acc) / (1.0 - base.accuracy) if base.accuracy < 1 else 0.0
    return ConfusionModel(
        base.taxonomy_size,
        acc,
        dict(base.confusable),
        base.concentration,
        f"{base.name}-n{n_per_class}",
        hard_confusion_rate=min(rate, 0.99),
        hard_mass=base.hard_mass,
    )


def model_to_dict(model: ConfusionModel) -> dict:
    return {
        "name": model.name,
        "taxonomy_size": model.taxonomy_size,
        "accuracy": model.accuracy,
        "concentration": model.concentration,
        "hard_confusion_rate": model.hard_confusion_rate,
        "hard_mass": model.hard_mass,
        "confusable": {str(c): [[t, w] for t, w in targets] for c, targets in sorted(model.confusable.items())},
    }


def save_model(model: ConfusionModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")


def model_from_dict(data, where: str = "<memory>") -> ConfusionModel:
    if not isinstance(data, dict):
        raise SchemaViolation(f"confusion model must be a JSON object: {where}")
    for key in ("taxonomy_size", "accuracy", "concentration", "confusable"):
        if key not in data:
            raise SchemaViolation(f"confusion model missing key {key!r}: {where}")
    if not isinstance(data["confusable"], dict):
        raise SchemaViolation(f"'confusable' must be an object: {where}")
    try:
        confusable = {
            int(c): tuple((int(t), float(w)) for t, w in targets)
            for c, targets in data["confusable"].items()
        }
    except (TypeError, ValueError) as e:
        raise SchemaViolation(f"malformed 'confusable' table: {where}: {e}") from e
    return ConfusionModel(
        int(data["taxonomy_size"]),
        float(data["accuracy"]),
        confusable,
        float(data["concentration"]),
        str(data.get("name", "custom")),
        hard_confusion_rate=float(data.get("hard_confusion_rate", 0.0)),
        hard_mass=float(data.get("hard_mass", 0.85)),
    )


def load_model(path: str | Path) -> ConfusionModel:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaViolation(f"confusion model is not valid JSON: {path}: {e}") from e
    return model_from_dict(data, where=str(path))
