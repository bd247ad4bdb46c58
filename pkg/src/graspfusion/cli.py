"""Command-line interface.

Exit codes: 0 success, 2 validation error (malformed inputs, schema or
dimension problems, bad flags), 3 data error (missing objects/images,
insufficient samples, mismatched trials).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import report as report_mod
from .affordance import build_varied, load_db, save_db, to_uniform, validate_db
from .datagen import (
    build_manifest,
    build_manifest_min_per_grasp,
    load_scenario,
    scenario_world,
)
from .errors import DataError, ValidationError
from .evaluate import (
    run_comparison,
    run_dataset_size_study,
    run_heterogeneity_analysis,
    run_heterogeneity_study,
    run_scenario,
    simulator_source,
    trend_from_pairs,
)
from .fusion import METHODS, decide, make_prior
from .heterogeneity import heterogeneity, report_to_dict as heterogeneity_to_dict
from .manifest import (
    load_distributions,
    load_manifest,
    nested_subsample,
    save_distributions,
    save_manifest,
    test_sample,
)
from .simulate import load_model, save_model, scenario_preset, simulate_manifest
from .streams import derive_rng
from .taxonomy import default_taxonomy, load_taxonomy, save_taxonomy


def _taxonomy(ctx):
    path = ctx.obj["taxonomy"]
    return load_taxonomy(path) if path else default_taxonomy()


def _out_dir(ctx) -> Path:
    out = Path(ctx.obj["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


@click.group()
@click.version_option(package_name="graspfusion")
@click.option("--taxonomy", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Taxonomy JSON file (defaults to the bundled 13-class set).")
@click.option("--seed", type=int, default=0, show_default=True, help="Master seed.")
@click.option("--prior", type=click.Choice(["uniform", "empirical"]), default="uniform",
              show_default=True, help="Marginal grasp-type prior.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True,
              help="Directory for written outputs.")
@click.pass_context
def cli(ctx, taxonomy, seed, prior, out_dir):
    """Grasp-type fusion toolkit: affordance databases, simulation, evaluation."""
    ctx.obj = {"taxonomy": taxonomy, "seed": seed, "prior": prior, "out_dir": out_dir}


# --- affordance -------------------------------------------------------------


@cli.group()
def affordance():
    """Build, flatten, inspect, and validate affordance databases."""


@affordance.command("build")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Output JSON path [default: <out-dir>/affordance_varied.json].")
@click.pass_context
def affordance_build(ctx, manifest_path, out_path):
    """Varied affordance database from a labeled manifest."""
    taxonomy = _taxonomy(ctx)
    manifest = load_manifest(manifest_path, taxonomy)
    db = build_varied(manifest)
    out = Path(out_path) if out_path else _out_dir(ctx) / "affordance_varied.json"
    save_db(db, out)
    click.echo(f"wrote {out} ({db.n_objects} objects, K={taxonomy.size})")


@affordance.command("flatten")
@click.option("--db", "db_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Output JSON path [default: <out-dir>/affordance_uniform.json].")
@click.pass_context
def affordance_flatten(ctx, db_path, out_path):
    """Uniform database: flatten non-zero entries over each object's support."""
    db = to_uniform(load_db(db_path))
    out = Path(out_path) if out_path else _out_dir(ctx) / "affordance_uniform.json"
    save_db(db, out)
    click.echo(f"wrote {out} ({db.n_objects} objects)")


@affordance.command("show")
@click.option("--db", "db_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--object", "object_name", default=None, help="Show a single object.")
@click.pass_context
def affordance_show(ctx, db_path, object_name):
    """Print database entries."""
    db = load_db(db_path)
    names = [object_name] if object_name else list(db.object_names())
    click.echo(f"kind={db.kind} K={db.taxonomy.size} objects={db.n_objects}")
    for name in names:
        vec = db.lookup(name)
        entries = ", ".join(
            f"{db.taxonomy.name_of(int(i))}={vec.values.values[i]:.4f}" for i in vec.support
        )
        click.echo(f"  {vec.object_name}: {entries}")


@affordance.command("validate")
@click.option("--db", "db_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def affordance_validate(ctx, db_path):
    """Re-check invariants of a (possibly hand-edited) database file."""
    problems = validate_db(load_db(db_path))
    if problems:
        raise ValidationError("; ".join(problems))
    click.echo("ok")


# --- sample -----------------------------------------------------------------


@cli.group()
def sample():
    """Seeded, stratified sampling of manifests."""


@sample.command("nested")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--sizes", required=True, help="Ascending per-grasp-type counts, e.g. 10,50,100.")
@click.pass_context
def sample_nested(ctx, manifest_path, sizes):
    """Nested training subsets (each smaller one inside every larger one)."""
    taxonomy = _taxonomy(ctx)
    manifest = load_manifest(manifest_path, taxonomy)
    size_list = [int(s) for s in sizes.split(",") if s.strip()]
    out_dir = _out_dir(ctx)
    for sub in nested_subsample(manifest, size_list, ctx.obj["seed"]):
        path = out_dir / f"{sub.name}.csv"
        save_manifest(sub, path)
        click.echo(f"wrote {path} ({len(sub)} records)")


@sample.command("test")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--count", required=True, type=int, help="Records per stratum.")
@click.option("--by", type=click.Choice(["object", "grasp"]), default="object", show_default=True)
@click.option("--trials", type=int, default=1, show_default=True)
@click.pass_context
def sample_test(ctx, manifest_path, count, by, trials):
    """Per-trial test sets sampled without replacement per stratum."""
    taxonomy = _taxonomy(ctx)
    manifest = load_manifest(manifest_path, taxonomy)
    out_dir = _out_dir(ctx)
    for t in range(trials):
        sub = test_sample(manifest, count, ctx.obj["seed"], trial=t, by=by)
        path = out_dir / f"trial-{t:03d}.csv"
        save_manifest(sub, path)
        click.echo(f"wrote {path} ({len(sub)} records)")


# --- simulate ----------------------------------------------------------------


@cli.command("simulate")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--preset", type=click.Choice(["real_objects", "mimed"]), default=None)
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Confusion-model JSON (overrides --preset).")
@click.option("--namespace", default="", help="Stream namespace to keep repeat runs distinct.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Output JSONL [default: <out-dir>/<manifest>-distributions.jsonl].")
@click.pass_context
def simulate_cmd(ctx, manifest_path, preset, model_path, namespace, out_path):
    """Write synthetic classifier distributions for every manifest record."""
    taxonomy = _taxonomy(ctx)
    manifest = load_manifest(manifest_path, taxonomy)
    if model_path:
        model = load_model(model_path)
    else:
        model = scenario_preset(preset or "real_objects", taxonomy)
    scored = simulate_manifest(manifest, model, ctx.obj["seed"], namespace=namespace)
    out = Path(out_path) if out_path else _out_dir(ctx) / f"{manifest.name}-distributions.jsonl"
    save_distributions(scored, out, comment=f"source=synthetic model={model.name}")
    click.echo(f"wrote {out} ({len(scored)} rows)")


# --- fuse ---------------------------------------------------------------------


@cli.command("fuse")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--distributions", "dist_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSONL of per-image vectors (needed by the cnn_* methods).")
@click.option("--db", "db_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Varied affordance database JSON.")
@click.option("--method", type=click.Choice(list(METHODS)), default="cnn_varied", show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Decisions CSV [default: <out-dir>/decisions.csv].")
@click.pass_context
def fuse_cmd(ctx, manifest_path, dist_path, db_path, method, out_path):
    """Decide a grasp type for every record with one of the five methods."""
    taxonomy = _taxonomy(ctx)
    manifest = load_manifest(manifest_path, taxonomy)
    if dist_path:
        manifest = load_distributions(dist_path, manifest)
    varied = load_db(db_path)
    uniform = to_uniform(varied)
    prior = make_prior(ctx.obj["prior"], taxonomy, manifest=manifest)
    rng = derive_rng(ctx.obj["seed"], "uniform-only/0")

    lines = ["image_id,object_name,true_grasp,decision,decision_name,fallback"]
    n_correct = 0
    for record in manifest.records:
        result = decide(
            method,
            cnn=record.distribution,
            varied=varied.lookup(record.object_name),
            uniform=uniform.lookup(record.object_name),
            prior=prior,
            rng=rng,
        )
        n_correct += int(result.decision == record.grasp_label)
        lines.append(
            f"{record.image_id},{record.object_name},"
            f"{taxonomy.name_of(record.grasp_label)},{result.decision},"
            f"{taxonomy.name_of(result.decision)},{int(result.fallback_used)}"
        )
    out = Path(out_path) if out_path else _out_dir(ctx) / "decisions.csv"
    out.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="")
    click.echo(f"wrote {out} ({len(manifest)} decisions, accuracy={n_correct / len(manifest):.4f})")


# --- evaluate -----------------------------------------------------------------


@cli.group()
def evaluate():
    """Run the evaluation protocols."""


@evaluate.command("compare")
@click.option("--scenario", "scenario_name", default=None,
              help="Bundled scenario (scenario1|scenario2) or a scenario JSON path; "
                   "synthesizes the whole world.")
@click.option("--trials", type=int, default=None, help="Override the scenario's trial count.")
@click.option("--tests-dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Directory of trial-NNN.csv + trial-NNN.jsonl pairs (explicit-input mode).")
@click.option("--varied-db", "varied_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--uniform-db", "uniform_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def evaluate_compare(ctx, scenario_name, trials, tests_dir, varied_path, uniform_path):
    """Five-method comparison over seeded trials."""
    seed = ctx.obj["seed"]
    if scenario_name:
        config = load_scenario(scenario_name)
        rep, _ = run_scenario(config, seed, trials=trials, prior_kind=ctx.obj["prior"])
    elif tests_dir and varied_path:
        taxonomy = _taxonomy(ctx)
        varied = load_db(varied_path)
        uniform = to_uniform(varied) if uniform_path is None else load_db(uniform_path)
        test_sets = []
        for csv_path in sorted(Path(tests_dir).glob("*.csv")):
            jsonl = csv_path.with_suffix(".jsonl")
            if not jsonl.exists():
                raise DataError(f"no distributions sidecar for {csv_path}")
            test_sets.append(load_distributions(jsonl, load_manifest(csv_path, taxonomy)))
        if not test_sets:
            raise DataError(f"no trial manifests found in {tests_dir}")
        prior = make_prior(ctx.obj["prior"], varied.taxonomy, manifest=test_sets[0])
        rep = run_comparison(test_sets, varied, uniform, prior, seed)
    else:
        raise ValidationError("pass --scenario, or --tests-dir with --varied-db")
    paths = report_mod.emit(rep, ["csv", "json", "svg_plot"], _out_dir(ctx))
    for m in rep.methods:
        click.echo(f"{m}: mean={rep.mean_accuracy(m):.4f} std={rep.std_accuracy(m):.4f}")
    for p in paths:
        click.echo(f"wrote {p}")


@evaluate.command("size-study")
@click.option("--scenario", "scenario_name", default="scenario1", show_default=True)
@click.option("--sizes", default="10,50,100,500,1000", show_default=True,
              help="Ascending per-grasp-type training sizes.")
@click.option("--tests", type=int, default=10, show_default=True, help="Test sets per size.")
@click.option("--per-grasp", type=int, default=100, show_default=True,
              help="Test records per grasp type.")
@click.pass_context
def evaluate_size_study(ctx, scenario_name, sizes, tests, per_grasp):
    """Classifier accuracy versus training-set size (synthetic world)."""
    seed = ctx.obj["seed"]
    config = load_scenario(scenario_name)
    taxonomy, supports = scenario_world(config)
    size_list = [int(s) for s in sizes.split(",") if s.strip()]

    largest = size_list[-1]
    train_pool = build_manifest_min_per_grasp(
        taxonomy, supports, largest, f"{config.name}-trainpool", split="train"
    )
    test_pool = build_manifest_min_per_grasp(
        taxonomy, supports, per_grasp, f"{config.name}-testpool", split="test"
    )
    training_sets = nested_subsample(train_pool, size_list, seed)
    test_sets = [
        test_sample(test_pool, per_grasp, seed, trial=t, by="grasp") for t in range(tests)
    ]
    base_model = scenario_preset(config.preset, taxonomy)
    rep = run_dataset_size_study(training_sets, test_sets, simulator_source(base_model, seed))
    paths = report_mod.emit(rep, ["csv", "json", "svg_plot"], _out_dir(ctx))
    for size in rep.sizes:
        click.echo(f"n={size}: mean={rep.mean_accuracy(size):.4f} std={rep.std_accuracy(size):.4f}")
    for p in paths:
        click.echo(f"wrote {p}")


@evaluate.command("heterogeneity")
@click.option("--db", "db_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Compute h for one affordance database.")
@click.option("--report", "report_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Comparison report JSON: pair stored per-trial h with improvements.")
@click.option("--worlds", type=int, default=None,
              help="Run the graded-skew study over this many synthetic worlds.")
@click.pass_context
def evaluate_heterogeneity(ctx, db_path, report_path, worlds):
    """Heterogeneity metric and the h-vs-improvement trend."""
    out_dir = _out_dir(ctx)
    if db_path:
        rep = heterogeneity(load_db(db_path))
        path = out_dir / "heterogeneity.json"
        path.write_text(json.dumps(heterogeneity_to_dict(rep), indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        click.echo(f"h={rep.h!r} over {rep.n_objects} objects ({rep.std_variant} std)")
        click.echo(f"wrote {path}")
        return
    if report_path:
        data = json.loads(Path(report_path).read_text(encoding="utf-8"))
        if data.get("type") != "comparison":
            raise ValidationError(f"{report_path} is not a comparison report")
        if not data["per_trial"] or "improvement" not in data["per_trial"][0]:
            raise ValidationError("report lacks per-trial improvements (cnn_varied/cnn_uniform)")
        trend = trend_from_pairs(
            [r["h"] for r in data["per_trial"]],
            [r["improvement"] for r in data["per_trial"]],
        )
    elif worlds:
        rep, dbs = run_heterogeneity_study(worlds, ctx.obj["seed"])
        trend = run_heterogeneity_analysis(rep, dbs)
    else:
        raise ValidationError("pass one of --db, --report, or --worlds")
    paths = report_mod.emit(trend, ["csv", "json", "svg_plot"], out_dir)
    click.echo(f"rank correlation: {trend.rank_correlation:.4f} over {len(trend.rows)} trials")
    for p in paths:
        click.echo(f"wrote {p}")


# --- report -------------------------------------------------------------------


@cli.group("report")
def report_group():
    """Re-render stored reports."""


@report_group.command("emit")
@click.option("--report", "report_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Report JSON produced by an evaluate command.")
@click.option("--format", "formats", multiple=True,
              type=click.Choice(["csv", "json", "svg_plot"]), default=("csv",), show_default=True)
@click.option("--basename", default=None, help="Output file stem [default: report type].")
@click.pass_context
def report_emit(ctx, report_path, formats, basename):
    """Render a stored report JSON to other formats."""
    data = json.loads(Path(report_path).read_text(encoding="utf-8"))
    paths = report_mod.emit(data, list(formats), _out_dir(ctx), basename=basename)
    for p in paths:
        click.echo(f"wrote {p}")


# --- dataset ------------------------------------------------------------------


@cli.group()
def dataset():
    """Synthetic benchmark data."""


@dataset.command("synth")
@click.option("--scenario", "scenario_name", default="scenario1", show_default=True,
              help="Bundled scenario name or scenario JSON path.")
@click.pass_context
def dataset_synth(ctx, scenario_name):
    """Write a scenario's full synthetic world: manifests, distributions,
    databases, model, and taxonomy."""
    seed = ctx.obj["seed"]
    config = load_scenario(scenario_name)
    taxonomy, supports = scenario_world(config)
    out_dir = _out_dir(ctx)

    train = build_manifest(taxonomy, supports, config.train_per_object, f"{config.name}-train", split="train")
    pool = build_manifest(taxonomy, supports, config.pool_per_object, f"{config.name}-pool", split="test")
    model = scenario_preset(config.preset, taxonomy)
    pool = simulate_manifest(pool, model, seed, namespace=config.preset)
    varied = build_varied(train)

    save_taxonomy(taxonomy, out_dir / "taxonomy.json")
    save_manifest(train, out_dir / "train.csv")
    save_manifest(pool, out_dir / "pool.csv")
    save_distributions(pool, out_dir / "pool-distributions.jsonl",
                       comment=f"source=synthetic model={model.name}")
    save_db(varied, out_dir / "affordance_varied.json")
    save_db(to_uniform(varied), out_dir / "affordance_uniform.json")
    save_model(model, out_dir / "model.json")
    for name in ("taxonomy.json", "train.csv", "pool.csv", "pool-distributions.jsonl",
                 "affordance_varied.json", "affordance_uniform.json", "model.json"):
        click.echo(f"wrote {out_dir / name}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return 2
    except click.exceptions.Abort:
        return 130
    except ValidationError as e:
        click.echo(f"error: {e}", err=True)
        return 2
    except DataError as e:
        click.echo(f"error: {e}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
