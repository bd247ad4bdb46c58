"""Scikit-learn-compatible front end for the fusion pipeline.

Wraps affordance building (fit) and probability fusion (predict) in the
estimator API so the pipeline composes with the surrounding ecosystem:
``get_params``/``set_params``/``clone`` work, ``score`` gives accuracy, and
labels round-trip as strings.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .affordance import build_varied_from_labels, to_uniform
from .errors import MissingInput, ValidationError
from .fusion import METHODS, ClassPrior, fuse_batch, make_prior
from .streams import derive_rng
from .taxonomy import GraspTaxonomy, normalize, normalize_name
from .validation import check_object_names, split_fusion_features


class AffordanceFusionClassifier(ClassifierMixin, BaseEstimator):
    """Grasp-type classifier fusing per-image probabilities with object priors.

    Parameters
    ----------
    method : str, default="cnn_varied"
        One of ``cnn_only``, ``uniform_only``, ``varied_only``,
        ``cnn_uniform``, ``cnn_varied``.
    prior : str, default="uniform"
        Marginal grasp-type prior: ``uniform`` or ``empirical`` (fitted from
        the training labels).
    taxonomy : GraspTaxonomy or None, default=None
        Class space. When None, classes are inferred from ``y`` in sorted
        order; pass a taxonomy explicitly to control index order (argmax
        ties break toward the lowest index).
    random_state : int, default=0
        Master seed for the ``uniform_only`` draws; predictions are
        deterministic per row index.

    Attributes
    ----------
    classes_ : ndarray of str
        Class names in taxonomy index order.
    varied_db_ / uniform_db_ : AffordanceDatabase
        Per-object priors built from the training pairs.

    Examples
    --------
    >>> clf = AffordanceFusionClassifier()
    >>> clf.fit(["mug", "mug", "apple"], ["medium wrap", "fixed hook", "power sphere"])
    AffordanceFusionClassifier()
    """

    def __init__(self, method="cnn_varied", prior="uniform", taxonomy=None, random_state=0):
        self.method = method
        self.prior = prior
        self.taxonomy = taxonomy
        self.random_state = random_state

    def fit(self, X, y):
        """Build the affordance databases from (object name, grasp label) pairs.

        X holds object names, shape (n,) or (n, 1); y holds grasp-type names.
        """
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}, got {self.method!r}")
        names = check_object_names(X)
        labels = check_object_names(y)
        if names.size != labels.size:
            raise ValidationError(f"X has {names.size} rows, y has {labels.size}")
        if names.size == 0:
            raise ValidationError("cannot fit on an empty dataset")

        if self.taxonomy is not None:
            taxonomy = self.taxonomy
        else:
            unique = sorted({normalize_name(label) for label in labels})
            taxonomy = GraspTaxonomy(tuple(unique), version="inferred-from-y")
        indices = [taxonomy.index_of(label) for label in labels]

        self.taxonomy_ = taxonomy
        self.classes_ = np.array(taxonomy.classes, dtype=object)
        self.varied_db_ = build_varied_from_labels(zip(names, indices), taxonomy)
        self.uniform_db_ = to_uniform(self.varied_db_)
        if self.prior == "empirical":
            counts = np.zeros(taxonomy.size)
            for i in indices:
                counts[i] += 1
            self.prior_ = ClassPrior(normalize(counts), "empirical")
        else:
            self.prior_ = make_prior(self.prior, taxonomy)
        return self

    def _posteriors(self, X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not hasattr(self, "classes_"):
            raise ValidationError("estimator is not fitted; call fit first")
        k = self.taxonomy_.size
        names, probs = split_fusion_features(X, k)
        needs_probs = self.method in ("cnn_only", "cnn_uniform", "cnn_varied")
        if needs_probs and probs is None:
            raise MissingInput("cnn")

        n = names.size
        posteriors = np.empty((n, k))
        fallback = np.zeros(n, dtype=bool)
        if self.method == "cnn_only":
            posteriors = probs
        else:
            db = self.varied_db_ if self.method in ("varied_only", "cnn_varied") else self.uniform_db_
            rows_by_object: dict[str, list[int]] = {}
            for i, name in enumerate(names):
                rows_by_object.setdefault(normalize_name(name), []).append(i)
            for name, rows in rows_by_object.items():
                vec = db.lookup(name)
                if self.method in ("varied_only", "uniform_only"):
                    posteriors[rows] = vec.values.values
                else:
                    post, _, fb = fuse_batch(probs[rows], vec.values.values, self.prior_)
                    posteriors[rows] = post
                    fallback[rows] = fb
        return names, posteriors, fallback

    def predict_proba(self, X):
        """Posterior probability rows, one per sample, in ``classes_`` order."""
        _, posteriors, _ = self._posteriors(X)
        return posteriors

    def predict(self, X):
        """Predicted grasp-type names.

        ``uniform_only`` draws from the support with a stream derived from
        ``random_state`` and the row index, so predictions are reproducible.
        """
        names, posteriors, _ = self._posteriors(X)
        if self.method == "uniform_only":
            decisions = np.empty(names.size, dtype=np.int64)
            for i, name in enumerate(names):
                support = self.uniform_db_.lookup(name).support
                u = float(derive_rng(self.random_state, f"uniform-only/{i}").random())
                decisions[i] = support[min(int(u * support.size), support.size - 1)]
        else:
            decisions = np.argmax(posteriors, axis=1)
        return self.classes_[decisions]
