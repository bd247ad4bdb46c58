import json

import numpy as np
import pytest

from graspfusion.affordance import build_varied, to_uniform
from graspfusion.errors import ValidationError
from graspfusion.evaluate import (
    run_comparison,
    run_dataset_size_study,
    simulator_source,
    trend_from_pairs,
)
from graspfusion.fusion import make_prior
from graspfusion.heterogeneity import heterogeneity
from graspfusion.manifest import DatasetManifest, SampleRecord, nested_subsample
from graspfusion.report import comparison_to_dict, emit
from graspfusion.simulate import ConfusionModel
from graspfusion.taxonomy import Distribution, GraspTaxonomy

TAX = GraspTaxonomy(("g0", "g1", "g2"))


@pytest.fixture(scope="module")
def small_report():
    records = []
    for i in range(12):
        v = np.zeros(3)
        v[i % 3] = 1.0
        records.append(
            SampleRecord(f"i{i:03d}", "cup" if i % 2 else "pen", i % 3, "test",
                         distribution=Distribution(v))
        )
    train = DatasetManifest(
        "t", TAX, tuple(SampleRecord(f"tr{i}", "cup" if i % 2 else "pen", i % 3, "train")
                        for i in range(12))
    )
    varied = build_varied(train)
    tests = [DatasetManifest(f"test{t}", TAX, tuple(records)) for t in range(2)]
    return run_comparison(tests, varied, to_uniform(varied), make_prior("uniform", TAX), 3)


def test_comparison_emit_all_formats(tmp_path, small_report):
    paths = emit(small_report, ["csv", "json", "svg_plot"], tmp_path, basename="cmp")
    assert [p.name for p in paths] == ["cmp.csv", "cmp.json", "cmp.svg"]
    csv_text = paths[0].read_text()
    header = csv_text.splitlines()[0].split(",")
    assert header[0] == "trial"
    assert "acc_cnn_varied" in header
    assert "h" in header
    assert "improvement" in header
    assert len(csv_text.splitlines()) == 1 + small_report.n_trials
    data = json.loads(paths[1].read_text())
    assert data["type"] == "comparison"
    assert set(data["aggregates"]) == set(small_report.methods)
    svg = paths[2].read_text()
    assert svg.startswith("<svg")
    assert "accuracy" in svg


def test_emit_is_byte_deterministic(tmp_path, small_report):
    a = emit(small_report, ["csv", "json", "svg_plot"], tmp_path / "a")
    b = emit(small_report, ["csv", "json", "svg_plot"], tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()


def test_json_round_trip_re_renders(tmp_path, small_report):
    (json_path,) = emit(small_report, ["json"], tmp_path)
    data = json.loads(json_path.read_text())
    paths = emit(data, ["csv"], tmp_path, basename="again")
    direct = emit(small_report, ["csv"], tmp_path, basename="direct")
    assert paths[0].read_bytes() == direct[0].read_bytes()


def test_trend_emit(tmp_path):
    trend = trend_from_pairs([0.1, 0.2, 0.3], [0.01, 0.015, 0.04])
    paths = emit(trend, ["csv", "json", "svg_plot"], tmp_path)
    csv_lines = paths[0].read_text().splitlines()
    assert csv_lines[0] == "trial,h,improvement"
    assert len(csv_lines) == 4
    data = json.loads(paths[1].read_text())
    assert data["rank_correlation"] == pytest.approx(1.0)


def test_size_study_emit(tmp_path):
    tax = GraspTaxonomy(("g0", "g1"))
    pool = DatasetManifest(
        "pool", tax, tuple(SampleRecord(f"i{i:03d}", "o", i % 2, "train") for i in range(200))
    )
    training = nested_subsample(pool, [5, 40], seed=3)
    base = ConfusionModel(2, 0.6, {}, 6.0)
    from graspfusion.manifest import test_sample as take_test_sample

    tests = [take_test_sample(pool, 20, 5, trial=t, by="grasp") for t in range(2)]
    report = run_dataset_size_study(training, tests, simulator_source(base, 17))
    paths = emit(report, ["csv", "json", "svg_plot"], tmp_path)
    lines = paths[0].read_text().splitlines()
    assert lines[0] == "size,trial,accuracy"
    assert len(lines) == 1 + 2 * 2


def test_heterogeneity_metric_emit(tmp_path, small_report):
    train = DatasetManifest(
        "t", TAX, tuple(SampleRecord(f"tr{i}", "cup", i % 3, "train") for i in range(9))
    )
    rep = heterogeneity(build_varied(train))
    (path,) = emit(rep, ["json"], tmp_path)
    data = json.loads(path.read_text())
    assert data["std_variant"] == "population"
    with pytest.raises(ValidationError):
        emit(rep, ["csv"], tmp_path)  # the metric has no CSV form of its own


def test_unknown_format_rejected(tmp_path, small_report):
    with pytest.raises(ValidationError):
        emit(small_report, ["pdf"], tmp_path)
    with pytest.raises(ValidationError):
        emit(object(), ["json"], tmp_path)


def test_decisions_only_on_request(small_report):
    lean = comparison_to_dict(small_report)
    fat = comparison_to_dict(small_report, include_decisions=True)
    assert "decisions" not in lean["per_trial"][0]
    assert len(fat["per_trial"][0]["decisions"]["cnn_only"]) == 12
