import json

import pytest

from graspfusion.cli import main

TINY_SCENARIO = {
    "name": "tiny",
    "preset": "real_objects",
    "trials": 3,
    "records_per_object": 8,
    "pool_per_object": 20,
    "train_per_object": 40,
}


@pytest.fixture()
def tiny(tmp_path):
    scenario = tmp_path / "tiny.json"
    scenario.write_text(json.dumps(TINY_SCENARIO))
    return tmp_path, scenario


def run(argv, expect=0, capsys=None):
    code = main(argv)
    assert code == expect, f"{argv} exited {code}" + (
        f": {capsys.readouterr().err}" if capsys else ""
    )
    return code


class TestDatasetSynthAndAffordance:
    def test_full_file_pipeline(self, tiny, capsys):
        tmp_path, scenario = tiny
        out = tmp_path / "world"
        run(["--seed", "5", "--out-dir", str(out), "dataset", "synth",
             "--scenario", str(scenario)], capsys=capsys)
        for name in ("taxonomy.json", "train.csv", "pool.csv", "pool-distributions.jsonl",
                     "affordance_varied.json", "affordance_uniform.json", "model.json"):
            assert (out / name).exists()

        run(["--taxonomy", str(out / "taxonomy.json"), "--out-dir", str(out),
             "affordance", "build", "--manifest", str(out / "train.csv")], capsys=capsys)
        db = json.loads((out / "affordance_varied.json").read_text())
        assert db["kind"] == "varied"
        assert len(db["objects"]) == 21

        run(["--out-dir", str(out), "affordance", "flatten",
             "--db", str(out / "affordance_varied.json")], capsys=capsys)
        flat = json.loads((out / "affordance_uniform.json").read_text())
        assert flat["kind"] == "uniform"

        run(["affordance", "validate", "--db", str(out / "affordance_varied.json")],
            capsys=capsys)
        run(["affordance", "show", "--db", str(out / "affordance_varied.json"),
             "--object", "mug"], capsys=capsys)
        assert "mug" in capsys.readouterr().out

    def test_fuse_and_decisions(self, tiny, capsys):
        tmp_path, scenario = tiny
        out = tmp_path / "world"
        run(["--seed", "5", "--out-dir", str(out), "dataset", "synth",
             "--scenario", str(scenario)], capsys=capsys)
        run(["--taxonomy", str(out / "taxonomy.json"), "--out-dir", str(out),
             "fuse", "--manifest", str(out / "pool.csv"),
             "--distributions", str(out / "pool-distributions.jsonl"),
             "--db", str(out / "affordance_varied.json"),
             "--method", "cnn_varied"], capsys=capsys)
        lines = (out / "decisions.csv").read_text().splitlines()
        assert lines[0] == "image_id,object_name,true_grasp,decision,decision_name,fallback"
        assert len(lines) == 1 + len((out / "pool.csv").read_text().splitlines()) - 1


class TestSampling:
    def test_nested_and_test_sampling(self, tiny, capsys):
        tmp_path, scenario = tiny
        out = tmp_path / "world"
        run(["--seed", "5", "--out-dir", str(out), "dataset", "synth",
             "--scenario", str(scenario)], capsys=capsys)
        samples = tmp_path / "samples"
        run(["--taxonomy", str(out / "taxonomy.json"), "--seed", "5",
             "--out-dir", str(samples), "sample", "nested",
             "--manifest", str(out / "pool.csv"), "--sizes", "1,2"], capsys=capsys)
        wrote = sorted(p.name for p in samples.glob("*.csv"))
        assert wrote == ["pool-n1.csv", "pool-n2.csv"]
        small = (samples / "pool-n1.csv").read_text().splitlines()
        large = (samples / "pool-n2.csv").read_text().splitlines()
        assert set(small[1:]) < set(large[1:])

        trials = tmp_path / "trials"
        run(["--taxonomy", str(out / "taxonomy.json"), "--seed", "5",
             "--out-dir", str(trials), "sample", "test",
             "--manifest", str(out / "pool.csv"), "--count", "4", "--trials", "2"],
            capsys=capsys)
        assert sorted(p.name for p in trials.glob("*.csv")) == ["trial-000.csv", "trial-001.csv"]

    def test_sampling_is_reproducible(self, tiny, capsys):
        tmp_path, scenario = tiny
        out = tmp_path / "world"
        run(["--seed", "5", "--out-dir", str(out), "dataset", "synth",
             "--scenario", str(scenario)], capsys=capsys)
        a, b = tmp_path / "a", tmp_path / "b"
        for directory in (a, b):
            run(["--taxonomy", str(out / "taxonomy.json"), "--seed", "9",
                 "--out-dir", str(directory), "sample", "test",
                 "--manifest", str(out / "pool.csv"), "--count", "4"], capsys=capsys)
        assert (a / "trial-000.csv").read_bytes() == (b / "trial-000.csv").read_bytes()


class TestSimulateCommand:
    def test_simulate_writes_jsonl(self, tiny, capsys):
        tmp_path, scenario = tiny
        out = tmp_path / "world"
        run(["--seed", "5", "--out-dir", str(out), "dataset", "synth",
             "--scenario", str(scenario)], capsys=capsys)
        run(["--taxonomy", str(out / "taxonomy.json"), "--seed", "5", "--out-dir", str(out),
             "simulate", "--manifest", str(out / "train.csv"),
             "--model", str(out / "model.json"), "--out", str(out / "train.jsonl")],
            capsys=capsys)
        lines = [l for l in (out / "train.jsonl").read_text().splitlines() if not l.startswith("#")]
        rows = [json.loads(l) for l in lines]
        assert len(rows) == len((out / "train.csv").read_text().splitlines()) - 1
        assert all(abs(sum(r["p"]) - 1) < 1e-6 for r in rows)


class TestEvaluateCommands:
    def test_compare_scenario_mode(self, tiny, capsys):
        tmp_path, scenario = tiny
        out = tmp_path / "report"
        run(["--seed", "5", "--out-dir", str(out), "evaluate", "compare",
             "--scenario", str(scenario)], capsys=capsys)
        text = capsys.readouterr().out
        assert "cnn_varied: mean=" in text
        data = json.loads((out / "comparison.json").read_text())
        assert data["n_trials"] == 3
        assert (out / "comparison.csv").exists()
        assert (out / "comparison.svg").exists()

        # re-render the stored JSON through `report emit`
        run(["--out-dir", str(out), "report", "emit",
             "--report", str(out / "comparison.json"),
             "--format", "csv", "--basename", "again"], capsys=capsys)
        assert (out / "again.csv").read_bytes() == (out / "comparison.csv").read_bytes()

        # the empirical-prior variant runs behind the global flag
        emp = tmp_path / "emp"
        run(["--seed", "5", "--prior", "empirical", "--out-dir", str(emp),
             "evaluate", "compare", "--scenario", str(scenario)], capsys=capsys)
        assert json.loads((emp / "comparison.json").read_text())["config"]["prior"] == "empirical"

    def test_compare_explicit_inputs_mode(self, tiny, capsys):
        tmp_path, scenario = tiny
        out = tmp_path / "world"
        run(["--seed", "5", "--out-dir", str(out), "dataset", "synth",
             "--scenario", str(scenario)], capsys=capsys)
        trials = tmp_path / "trials"
        run(["--taxonomy", str(out / "taxonomy.json"), "--seed", "5",
             "--out-dir", str(trials), "sample", "test",
             "--manifest", str(out / "pool.csv"), "--count", "4", "--trials", "2"],
            capsys=capsys)
        for csv_path in trials.glob("*.csv"):
            run(["--taxonomy", str(out / "taxonomy.json"), "--seed", "5",
                 "simulate", "--manifest", str(csv_path),
                 "--model", str(out / "model.json"),
                 "--out", str(csv_path.with_suffix(".jsonl"))], capsys=capsys)
        report_dir = tmp_path / "explicit"
        run(["--taxonomy", str(out / "taxonomy.json"), "--seed", "5",
             "--out-dir", str(report_dir), "evaluate", "compare",
             "--tests-dir", str(trials),
             "--varied-db", str(out / "affordance_varied.json")], capsys=capsys)
        data = json.loads((report_dir / "comparison.json").read_text())
        assert data["n_trials"] == 2

    def test_size_study(self, tiny, capsys):
        tmp_path, scenario = tiny
        out = tmp_path / "size"
        run(["--seed", "5", "--out-dir", str(out), "evaluate", "size-study",
             "--scenario", str(scenario), "--sizes", "5,20", "--tests", "2",
             "--per-grasp", "10"], capsys=capsys)
        data = json.loads((out / "size_study.json").read_text())
        assert [e["size"] for e in data["per_size"]] == [5, 20]

    def test_heterogeneity_modes(self, tiny, capsys):
        tmp_path, scenario = tiny
        out = tmp_path / "world"
        run(["--seed", "5", "--out-dir", str(out), "dataset", "synth",
             "--scenario", str(scenario)], capsys=capsys)
        run(["--out-dir", str(out), "evaluate", "heterogeneity",
             "--db", str(out / "affordance_varied.json")], capsys=capsys)
        metric = json.loads((out / "heterogeneity.json").read_text())
        assert metric["n_objects"] == 21

        cmp_dir = tmp_path / "cmp"
        run(["--seed", "5", "--out-dir", str(cmp_dir), "evaluate", "compare",
             "--scenario", str(scenario)], capsys=capsys)
        run(["--out-dir", str(cmp_dir), "evaluate", "heterogeneity",
             "--report", str(cmp_dir / "comparison.json")], capsys=capsys)
        trend = json.loads((cmp_dir / "heterogeneity_trend.json").read_text())
        assert len(trend["per_trial"]) == 3

        worlds_dir = tmp_path / "worlds"
        run(["--seed", "5", "--out-dir", str(worlds_dir), "evaluate", "heterogeneity",
             "--worlds", "3"], capsys=capsys)
        assert (worlds_dir / "heterogeneity_trend.svg").exists()


class TestExitCodes:
    def test_validation_error_is_2(self, tiny, capsys):
        tmp_path, scenario = tiny
        out = tmp_path / "world"
        run(["--seed", "5", "--out-dir", str(out), "dataset", "synth",
             "--scenario", str(scenario)], capsys=capsys)
        # descending sizes: validation error
        code = main(["--taxonomy", str(out / "taxonomy.json"), "--out-dir", str(tmp_path),
                     "sample", "nested", "--manifest", str(out / "pool.csv"),
                     "--sizes", "7,3"])
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_data_error_is_3(self, tiny, capsys):
        tmp_path, scenario = tiny
        out = tmp_path / "world"
        run(["--seed", "5", "--out-dir", str(out), "dataset", "synth",
             "--scenario", str(scenario)], capsys=capsys)
        # ask for more records per stratum than the pool holds
        code = main(["--taxonomy", str(out / "taxonomy.json"), "--out-dir", str(tmp_path),
                     "sample", "test", "--manifest", str(out / "pool.csv"),
                     "--count", "100000"])
        assert code == 3

    def test_malformed_db_is_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        assert main(["affordance", "show", "--db", str(bad)]) == 2

    def test_usage_error_is_2(self, capsys):
        assert main(["affordance", "build"]) == 2  # missing required --manifest

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "affordance" in capsys.readouterr().out
