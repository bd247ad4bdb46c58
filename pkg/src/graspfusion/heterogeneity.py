"""Grasp-type heterogeneity: mean per-object spread of non-zero prior values.

For each object the population standard deviation of its non-zero affordance
entries is taken; h is the unweighted mean over objects. Population (divide
by m) rather than sample (m-1) std keeps the metric defined for objects with
a single grasp type, which real data contains; those objects contribute
exactly 0.

Non-zero values are sorted before the std computation so the result is
bit-identical under any permutation of taxonomy classes or objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .affordance import AffordanceDatabase
from .errors import EmptyDatabase

STD_VARIANT = "population"


@dataclass(frozen=True)
class HeterogeneityReport:
    h: float
    per_object: Mapping[str, float]
    n_objects: int
    std_variant: str = STD_VARIANT


def nonzero_std(values: np.ndarray) -> float:
    """Population std of the strictly positive entries of a vector."""
    nz = np.sort(values[values > 0])
    if nz.size == 0:
        raise EmptyDatabase("vector has no non-zero entries")
    if nz[0] == nz[-1]:
        return 0.0
    return float(np.std(nz))


def heterogeneity(db: AffordanceDatabase) -> HeterogeneityReport:
    """Compute h for a database (uniform databases yield exactly 0)."""
    if db.n_objects == 0:
        raise EmptyDatabase("cannot compute heterogeneity of an empty database")
    per_object = {name: nonzero_std(vec.values.values) for name, vec in db.entries.items()}
    h = float(np.mean(sorted(per_object.values())))
    return HeterogeneityReport(h=h, per_object=per_object, n_objects=len(per_object))


def report_to_dict(report: HeterogeneityReport) -> dict:
    return {
        "h": report.h,
        "n_objects": report.n_objects,
        "std_variant": report.std_variant,
        "per_object": dict(sorted(report.per_object.items())),
    }
