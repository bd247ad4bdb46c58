import numpy as np
import pytest
from sklearn.base import clone, is_classifier

from graspfusion.errors import (
    DimensionMismatch,
    MissingInput,
    NotNormalized,
    ObjectNotFound,
    ValidationError,
)
from graspfusion.estimator import AffordanceFusionClassifier
from graspfusion.taxonomy import GraspTaxonomy
from graspfusion.validation import (
    check_object_names,
    check_probability_rows,
    split_fusion_features,
    stack_fusion_features,
)

TAX = GraspTaxonomy(("wrap", "pinch", "hook"))

OBJECTS = ["mug", "mug", "mug", "mug", "card", "card"]
LABELS = ["wrap", "wrap", "wrap", "hook", "pinch", "pinch"]


def fitted(method="cnn_varied", **kwargs):
    clf = AffordanceFusionClassifier(method=method, taxonomy=TAX, **kwargs)
    return clf.fit(OBJECTS, LABELS)


class TestFit:
    def test_builds_databases_and_classes(self):
        clf = fitted()
        assert clf.classes_.tolist() == ["wrap", "pinch", "hook"]
        mug = clf.varied_db_.lookup("mug").values.values
        assert mug.tolist() == [0.75, 0.0, 0.25]
        assert clf.uniform_db_.lookup("mug").values.values.tolist() == [0.5, 0.0, 0.5]

    def test_inferred_taxonomy_is_sorted(self):
        clf = AffordanceFusionClassifier().fit(OBJECTS, LABELS)
        assert clf.classes_.tolist() == sorted(["wrap", "pinch", "hook"])

    def test_empirical_prior(self):
        clf = fitted(prior="empirical")
        assert clf.prior_.values.values.tolist() == [0.5, 1 / 3, 1 / 6]

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            AffordanceFusionClassifier(taxonomy=TAX).fit(["mug"], ["wrap", "hook"])

    def test_unknown_method_rejected_at_fit(self):
        with pytest.raises(ValidationError):
            AffordanceFusionClassifier(method="vote", taxonomy=TAX).fit(OBJECTS, LABELS)


class TestPredict:
    def test_fusion_matches_hand_product(self):
        clf = fitted()
        X = stack_fusion_features(["mug"], np.array([[0.1, 0.6, 0.3]]))
        proba = clf.predict_proba(X)
        # products: [0.1*0.75, 0, 0.3*0.25] = [0.075, 0, 0.075] -> tie
        assert np.allclose(proba, [[0.5, 0.0, 0.5]], atol=1e-12)
        assert clf.predict(X)[0] == "wrap"  # tie breaks to the lower index

    def test_excluding_effect(self):
        clf = fitted()
        X = stack_fusion_features(["mug"], np.array([[0.0, 0.9, 0.1]]))
        proba = clf.predict_proba(X)
        assert proba[0, 1] == 0.0
        assert clf.predict(X)[0] == "hook"

    def test_cnn_only_ignores_object(self):
        clf = fitted(method="cnn_only")
        X = stack_fusion_features(["mug", "card"], np.tile([0.1, 0.6, 0.3], (2, 1)))
        assert clf.predict(X).tolist() == ["pinch", "pinch"]

    def test_affordance_only_methods_take_names_alone(self):
        clf = fitted(method="varied_only")
        assert clf.predict(["mug", "card"]).tolist() == ["wrap", "pinch"]

    def test_uniform_only_is_reproducible_and_supported(self):
        clf = fitted(method="uniform_only", random_state=11)
        X = ["mug"] * 50
        a = clf.predict(X)
        b = clf.predict(X)
        assert a.tolist() == b.tolist()
        assert set(a) <= {"wrap", "hook"}
        other = fitted(method="uniform_only", random_state=12).predict(X)
        assert a.tolist() != other.tolist()

    def test_score_is_accuracy(self):
        clf = fitted()
        X = stack_fusion_features(
            ["mug", "card"], np.array([[0.8, 0.1, 0.1], [0.1, 0.8, 0.1]])
        )
        assert clf.score(X, ["wrap", "pinch"]) == 1.0

    def test_unknown_object_raises(self):
        clf = fitted()
        X = stack_fusion_features(["bottle"], np.array([[0.5, 0.3, 0.2]]))
        with pytest.raises(ObjectNotFound):
            clf.predict(X)

    def test_missing_distribution_columns(self):
        clf = fitted()
        with pytest.raises(MissingInput):
            clf.predict(["mug"])

    def test_unfitted_predict(self):
        clf = AffordanceFusionClassifier(taxonomy=TAX)
        with pytest.raises(ValidationError):
            clf.predict(["mug"])


class TestSklearnProtocol:
    def test_get_set_params_and_clone(self):
        clf = AffordanceFusionClassifier(method="cnn_uniform", prior="empirical", random_state=5)
        params = clf.get_params()
        assert params["method"] == "cnn_uniform"
        twin = clone(clf)
        assert twin.get_params() == params
        clf.set_params(method="cnn_only")
        assert clf.method == "cnn_only"

    def test_is_classifier(self):
        assert is_classifier(AffordanceFusionClassifier())


class TestValidationHelpers:
    def test_check_object_names_shapes(self):
        assert check_object_names(["a", "b"]).tolist() == ["a", "b"]
        assert check_object_names(np.array([["a"], ["b"]], dtype=object)).tolist() == ["a", "b"]
        with pytest.raises(DimensionMismatch):
            check_object_names(np.zeros((2, 3)))

    def test_check_probability_rows(self):
        rows = check_probability_rows([[0.5, 0.5], [1.0, 0.0]], 2)
        assert rows.shape == (2, 2)
        with pytest.raises(NotNormalized):
            check_probability_rows([[0.5, 0.6]], 2)
        with pytest.raises(DimensionMismatch):
            check_probability_rows([[0.5, 0.5]], 3)

    def test_split_and_stack_round_trip(self):
        X = stack_fusion_features(["a", "b"], np.array([[0.25, 0.75], [1.0, 0.0]]))
        names, rows = split_fusion_features(X, 2)
        assert names.tolist() == ["a", "b"]
        assert np.allclose(rows, [[0.25, 0.75], [1.0, 0.0]])
        names_only, nothing = split_fusion_features(["a", "b"], 2)
        assert nothing is None
        with pytest.raises(DimensionMismatch):
            split_fusion_features(np.zeros((2, 4), dtype=object), 2)
        with pytest.raises(DimensionMismatch):
            stack_fusion_features(["a"], np.zeros((2, 2)))
