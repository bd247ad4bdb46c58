"""Grasp-type recognition by fusing classifier probabilities with object
affordance priors, plus the sampling, simulation, and evaluation machinery
needed to study how much those priors help."""

from .affordance import (
    AffordanceDatabase,
    AffordanceVector,
    build_varied,
    build_varied_from_labels,
    load_db,
    save_db,
    to_uniform,
    validate_db,
)
from .errors import DataError, GraspFusionError, ValidationError
from .estimator import AffordanceFusionClassifier
from .evaluate import (
    EvaluationReport,
    HeterogeneityTrend,
    SizeStudyReport,
    TrialResult,
    audit_exclusions,
    run_comparison,
    run_dataset_size_study,
    run_heterogeneity_analysis,
    run_heterogeneity_study,
    run_scenario,
    simulator_source,
)
from .fusion import METHODS, ClassPrior, FusionResult, decide, fuse, fuse_batch, make_prior
from .heterogeneity import HeterogeneityReport, heterogeneity
from .manifest import (
    DatasetManifest,
    SampleRecord,
    load_distributions,
    load_manifest,
    nested_subsample,
    save_distributions,
    save_manifest,
    test_sample,
)
from .report import emit
from .simulate import ConfusionModel, scenario_preset, simulate, simulate_manifest
from .streams import derive_rng, derive_seed
from .taxonomy import (
    Distribution,
    GraspTaxonomy,
    argmax,
    default_taxonomy,
    load_taxonomy,
    normalize,
    save_taxonomy,
)

__version__ = "0.1.0"

__all__ = [
    "AffordanceDatabase",
    "AffordanceFusionClassifier",
    "AffordanceVector",
    "ClassPrior",
    "ConfusionModel",
    "DataError",
    "DatasetManifest",
    "Distribution",
    "EvaluationReport",
    "FusionResult",
    "GraspFusionError",
    "GraspTaxonomy",
    "HeterogeneityReport",
    "HeterogeneityTrend",
    "METHODS",
    "SampleRecord",
    "SizeStudyReport",
    "TrialResult",
    "ValidationError",
    "argmax",
    "audit_exclusions",
    "build_varied",
    "build_varied_from_labels",
    "decide",
    "default_taxonomy",
    "derive_rng",
    "derive_seed",
    "emit",
    "fuse",
    "fuse_batch",
    "heterogeneity",
    "load_db",
    "load_distributions",
    "load_manifest",
    "load_taxonomy",
    "make_prior",
    "nested_subsample",
    "normalize",
    "run_comparison",
    "run_dataset_size_study",
    "run_heterogeneity_analysis",
    "run_heterogeneity_study",
    "run_scenario",
    "save_db",
    "save_distributions",
    "save_manifest",
    "save_taxonomy",
    "scenario_preset",
    "simulate",
    "simulate_manifest",
    "simulator_source",
    "test_sample",
    "to_uniform",
    "validate_db",
]
