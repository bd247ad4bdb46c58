"""Combining classifier output with object priors, and the five decision methods.

The core rule: the classifier's per-image distribution and the object's
affordance multiply, the marginal grasp-type prior divides out, and the
result renormalizes. With a uniform marginal prior the division is skipped
entirely, so fusion is exactly product-then-normalize (the constant cancels
and must not introduce rounding).

Zero affordance entries force zero posterior entries, which is what removes
impossible grasp types from candidacy. If the raw product is zero everywhere
the affordance argmax is used instead and the result is flagged; a decision
is always produced, the flag keeps evaluation honest.

Decision methods:

- ``cnn_only``      argmax of the classifier distribution
- ``varied_only``   argmax of the varied affordance
- ``uniform_only``  uniform random draw from the affordance support
- ``cnn_uniform``   fusion with the uniform affordance
- ``cnn_varied``    fusion with the varied affordance
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affordance import AffordanceVector
from .errors import (
    DimensionMismatch,
    EmptyManifest,
    MissingInput,
    PriorZeroOnSupport,
    ValidationError,
)
from .taxonomy import Distribution, GraspTaxonomy, argmax, normalize

METHODS = ("cnn_only", "uniform_only", "varied_only", "cnn_uniform", "cnn_varied")

PRIOR_UNIFORM = "uniform"
PRIOR_EMPIRICAL = "empirical"


@dataclass(frozen=True)
class ClassPrior:
    """Marginal grasp-type prior p(g); uniform by default (see make_prior)."""

    values: Distribution
    source: str

    def __post_init__(self):
        if self.source not in (PRIOR_UNIFORM, PRIOR_EMPIRICAL):
            raise ValidationError(f"prior source must be uniform|empirical, got {self.source!r}")
        if self.source == PRIOR_UNIFORM and np.any(self.values.values <= 0):
            raise ValidationError("uniform prior must be strictly positive")

    @property
    def is_uniform(self) -> bool:
        return self.source == PRIOR_UNIFORM


def make_prior(
    kind: str = PRIOR_UNIFORM,
    taxonomy: GraspTaxonomy | None = None,
    manifest=None,
) -> ClassPrior:
    """Uniform prior (1/K) or empirical prior (global grasp-label histogram)."""
    if kind == PRIOR_UNIFORM:
        if taxonomy is None and manifest is None:
            raise MissingInput("taxonomy")
        k = taxonomy.size if taxonomy is not None else manifest.taxonomy.size
        return ClassPrior(Distribution(np.full(k, 1.0 / k)), PRIOR_UNIFORM)
    if kind == PRIOR_EMPIRICAL:
        if manifest is None or not manifest.records:
            raise EmptyManifest("empirical prior requires a non-empty manifest")
        k = manifest.taxonomy.size
        counts = np.zeros(k)
        for r in manifest.records:
            counts[r.grasp_label] += 1
        return ClassPrior(normalize(counts), PRIOR_EMPIRICAL)
    raise ValidationError(f"prior kind must be uniform|empirical, got {kind!r}")


@dataclass(frozen=True)
class FusionResult:
    """Posterior, decision index, method tag, and the all-zero-product flag.

    ``decision == argmax(posterior)`` for every method except
    ``uniform_only`` (whose decision is a seeded random draw from the
    support) and flagged fallbacks (where the decision is the affordance
    argmax and the posterior is the affordance itself).
    """

    posterior: Distribution
    decision: int
    method: str
    fallback_used: bool = False


def fuse_batch(
    p_image: np.ndarray, affordance_values: np.ndarray, prior: ClassPrior
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized fusion of n image distributions against one affordance.

    Returns (posteriors (n, K), decisions (n,), fallback mask (n,)).
    Rows whose raw product is all-zero fall back to the affordance argmax and
    carry the affordance as their posterior.
    """
    p_image = np.atleast_2d(np.asarray(p_image, dtype=np.float64))
    aff = np.asarray(affordance_values, dtype=np.float64)
    k = aff.size
    if p_image.shape[1] != k:
        raise DimensionMismatch(f"image distributions have K={p_image.shape[1]}, affordance K={k}")
    if len(prior.values) != k:
        raise DimensionMismatch(f"prior has K={len(prior.values)}, affordance K={k}")

    raw = p_image * aff
    if not prior.is_uniform:
        prior_values = prior.values.values
        used = (raw > 0).any(axis=0)
        if np.any(used & (prior_values == 0)):
            bad = np.flatnonzero(used & (prior_values == 0)).tolist()
            raise PriorZeroOnSupport(f"prior is zero on supported classes {bad}")
        raw = np.divide(raw, prior_values, out=np.zeros_like(raw), where=raw > 0)

    sums = raw.sum(axis=1)
    fallback = sums == 0.0
    posteriors = np.empty_like(raw)
    ok = ~fallback
    posteriors[ok] = raw[ok] / sums[ok, None]
    posteriors[fallback] = aff
    decisions = np.argmax(posteriors, axis=1)
    return posteriors, decisions, fallback


def fuse(cnn: Distribution, affordance: AffordanceVector, prior: ClassPrior) -> FusionResult:
    """Fuse one image distribution with one object affordance."""
    posteriors, decisions, fallback = fuse_batch(
        cnn.values[None, :], affordance.values.values, prior
    )
    method = "cnn_varied" if affordance.kind == "varied" else "cnn_uniform"
    return FusionResult(
        posterior=Distribution(posteriors[0]),
        decision=int(decisions[0]),
        method=method,
        fallback_used=bool(fallback[0]),
    )


def draw_from_support(support: np.ndarray, u: float) -> int:
    """Map one uniform variate to a support index: support[floor(u * m)]."""
    m = support.size
    return int(support[min(int(u * m), m - 1)])


def decide(
    method: str,
    cnn: Distribution | None = None,
    varied: AffordanceVector | None = None,
    uniform: AffordanceVector | None = None,
    prior: ClassPrior | None = None,
    rng: np.random.Generator | None = None,
) -> FusionResult:
    """Run one of the five decision methods on a single sample.

    Only the inputs the chosen method needs must be present; a missing one
    raises ``MissingInput`` naming it. ``uniform_only`` consumes exactly one
    variate from ``rng`` per decision.
    """
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}; expected one of {METHODS}")

    if method == "cnn_only":
        if cnn is None:
            raise MissingInput("cnn")
        return FusionResult(cnn, argmax(cnn), method)

    if method == "varied_only":
        if varied is None:
            raise MissingInput("varied")
        return FusionResult(varied.values, argmax(varied.values), method)

    if method == "uniform_only":
        if uniform is None:
            raise MissingInput("uniform")
        if rng is None:
            raise MissingInput("rng")
        decision = draw_from_support(uniform.support, float(rng.random()))
        return FusionResult(uniform.values, decision, method)

    affordance = varied if method == "cnn_varied" else uniform
    if cnn is None:
        raise MissingInput("cnn")
    if affordance is None:
        raise MissingInput("varied" if method == "cnn_varied" else "uniform")
    if prior is None:
        raise MissingInput("prior")
    result = fuse(cnn, affordance, prior)
    return FusionResult(result.posterior, result.decision, method, result.fallback_used)
