import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graspfusion.affordance import (
    AffordanceDatabase,
    AffordanceVector,
    build_varied,
    build_varied_from_labels,
    db_to_dict,
    load_db,
    save_db,
    to_uniform,
    validate_db,
)
from graspfusion.errors import (
    DimensionMismatch,
    EmptyManifest,
    ObjectNotFound,
    SchemaViolation,
    UnknownLabel,
)
from graspfusion.manifest import DatasetManifest, SampleRecord
from graspfusion.taxonomy import Distribution, GraspTaxonomy

TAX3 = GraspTaxonomy(("g0", "g1", "g2"), version="t3")


def manifest_from_pairs(pairs, taxonomy=TAX3):
    records = tuple(
        SampleRecord(f"img-{i:03d}", obj, label, "train")
        for i, (obj, label) in enumerate(pairs)
    )
    return DatasetManifest("fixture", taxonomy, records)


# strategy: a database of 1..6 objects over K in 2..8, entries built from
# integer count histograms the way build_varied does
@st.composite
def databases(draw):
    k = draw(st.integers(min_value=2, max_value=8))
    taxonomy = GraspTaxonomy(tuple(f"g{i}" for i in range(k)))
    n_objects = draw(st.integers(min_value=1, max_value=6))
    pairs = []
    for o in range(n_objects):
        support = draw(
            st.lists(st.integers(min_value=0, max_value=k - 1), min_size=1, max_size=k, unique=True)
        )
        for cls in support:
            for _ in range(draw(st.integers(min_value=1, max_value=4))):
                pairs.append((f"object {o}", cls))
    return build_varied_from_labels(pairs, taxonomy)


class TestBuildVaried:
    def test_hand_histogram(self):
        m = manifest_from_pairs([("mug", 0), ("mug", 1), ("mug", 0), ("mug", 1)])
        db = build_varied(m)
        assert db.lookup("mug").values.values.tolist() == [0.5, 0.5, 0.0]
        assert db.kind == "varied"

    def test_single_class_object(self):
        m = manifest_from_pairs([("plate", 2), ("plate", 2)])
        assert build_varied(m).lookup("plate").values.values.tolist() == [0.0, 0.0, 1.0]

    def test_equal_counts_give_equal_nonzero_entries(self):
        # balanced collection: same image count for every (object, grasp) pair
        pairs = [(obj, g) for obj in ("a", "b") for g in (0, 1) for _ in range(10)]
        db = build_varied(manifest_from_pairs(pairs))
        for name in ("a", "b"):
            nz = db.lookup(name).values.values
            nz = nz[nz > 0]
            assert np.ptp(nz) == 0.0

    def test_empty_manifest(self):
        with pytest.raises(EmptyManifest):
            build_varied_from_labels([], TAX3)

    def test_unknown_label(self):
        with pytest.raises(UnknownLabel):
            build_varied_from_labels([("mug", 7)], TAX3)

    def test_remaps_to_reduced_taxonomy(self):
        m = manifest_from_pairs([("mug", 0), ("mug", 2)])
        reduced = TAX3.subset(["g1"])
        db = build_varied(m, reduced)
        assert db.lookup("mug").values.values.tolist() == [0.5, 0.5]
        # a record whose label was dropped cannot remap
        m2 = manifest_from_pairs([("mug", 1)])
        with pytest.raises(UnknownLabel):
            build_varied(m2, reduced)

    @given(databases())
    @settings(max_examples=100)
    def test_entries_sum_to_one(self, db):
        for vec in db.entries.values():
            assert abs(float(vec.values.values.sum()) - 1.0) <= 1e-9

    @given(databases())
    @settings(max_examples=100)
    def test_lookup_succeeds_for_every_built_object(self, db):
        for name in db.object_names():
            assert db.lookup(name).object_name == name


class TestToUniform:
    def test_hand_flattening(self):
        vec = AffordanceVector("cup", Distribution(np.array([0.2, 0.8, 0.0])), "varied")
        db = AffordanceDatabase(TAX3, {"cup": vec}, "varied")
        flat = to_uniform(db).lookup("cup")
        assert flat.values.values.tolist() == [0.5, 0.5, 0.0]
        assert flat.kind == "uniform"

    def test_singleton_fixed_point(self):
        vec = AffordanceVector("cup", Distribution(np.array([0.0, 0.0, 1.0])), "varied")
        db = AffordanceDatabase(TAX3, {"cup": vec}, "varied")
        assert to_uniform(db).lookup("cup").values.values.tolist() == [0.0, 0.0, 1.0]

    @given(databases())
    @settings(max_examples=100)
    def test_idempotent_and_support_preserving(self, db):
        once = to_uniform(db)
        twice = to_uniform(once)
        for name in db.object_names():
            v0 = db.lookup(name)
            v1 = once.lookup(name)
            assert np.array_equal(v1.support, v0.support)
            assert np.array_equal(twice.lookup(name).values.values, v1.values.values)
            nz = v1.values.values[v1.values.values > 0]
            assert np.ptp(nz) == 0.0


class TestLookup:
    @pytest.fixture()
    def db(self):
        return build_varied(manifest_from_pairs([("chip can", 0), ("apple", 1)]))

    def test_case_fold(self, db):
        assert db.lookup("Apple").object_name == "apple"

    def test_whitespace_normalization(self, db):
        assert db.lookup("  chip  can ").object_name == "chip can"

    def test_not_found_carries_query(self, db):
        with pytest.raises(ObjectNotFound) as err:
            db.lookup(" Wine  Glass ")
        assert err.value.query == "wine glass"

    def test_fallback_is_opt_in(self, db):
        vec = db.lookup("wine glass", fallback_uniform=True)
        assert vec.kind == "uniform"
        assert np.allclose(vec.values.values, 1 / 3)


class TestDatabaseFiles:
    @given(db=databases())
    @settings(max_examples=50)
    def test_save_load_round_trips_bit_exactly(self, tmp_path_factory, db):
        path = tmp_path_factory.mktemp("db") / "db.json"
        save_db(db, path)
        loaded = load_db(path)
        assert loaded.kind == db.kind
        assert loaded.object_names() == db.object_names()
        for name in db.object_names():
            assert np.array_equal(
                loaded.lookup(name).values.values, db.lookup(name).values.values
            )

    def test_schema_violations(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(SchemaViolation):
            load_db(path)
        path.write_text(json.dumps({"kind": "varied", "objects": {}}))
        with pytest.raises(SchemaViolation):
            load_db(path)

    def test_dimension_mismatch(self, tmp_path):
        db = build_varied(manifest_from_pairs([("mug", 0)]))
        data = db_to_dict(db)
        data["objects"]["mug"] = [1.0, 0.0]  # K=2 against a K=3 taxonomy
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(DimensionMismatch):
            load_db(path)

    def test_hand_edits_validate_on_load(self, tmp_path):
        db = build_varied(manifest_from_pairs([("mug", 0), ("mug", 1)]))
        assert validate_db(db) == []
        path = tmp_path / "edited.json"
        # low-precision hand edit within tolerance: renormalized silently
        ok = db_to_dict(to_uniform(db))
        ok["objects"]["mug"] = [0.4999999, 0.4999999, 0.0]
        path.write_text(json.dumps(ok))
        loaded = load_db(path)
        assert validate_db(loaded) == []
        assert abs(float(loaded.lookup("mug").values.values.sum()) - 1.0) <= 1e-12
        # a drifted uniform entry (unequal non-zero values) is rejected
        bad = db_to_dict(to_uniform(db))
        bad["objects"]["mug"] = [0.5000001, 0.4999999, 0.0]
        path.write_text(json.dumps(bad))
        with pytest.raises(SchemaViolation):
            load_db(path)


class TestInvariants:
    def test_uniform_kind_requires_equal_entries(self):
        with pytest.raises(SchemaViolation):
            AffordanceVector("x", Distribution(np.array([0.2, 0.8, 0.0])), "uniform")

    def test_entry_taxonomy_width_checked(self):
        vec = AffordanceVector("x", Distribution(np.array([0.5, 0.5])), "varied")
        with pytest.raises(DimensionMismatch):
            AffordanceDatabase(TAX3, {"x": vec}, "varied")

    def test_support_is_exactly_observed_labels(self):
        # the excluding effect's foundation: zeros mark never-observed grasps
        pairs = [("mug", 0), ("mug", 0), ("mug", 2), ("bowl", 1)]
        db = build_varied_from_labels(pairs, TAX3)
        assert db.lookup("mug").support.tolist() == [0, 2]
        assert db.lookup("bowl").support.tolist() == [1]
