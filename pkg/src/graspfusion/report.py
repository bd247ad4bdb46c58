"""Rendering evaluation results to CSV, JSON, and simple SVG plots.

CSV and JSON outputs are byte-deterministic for a fixed report: fixed column
order, sorted keys, repr-precision floats, LF line endings. SVG plots are
plain scatter/bar/line renderings with labeled axes, no plotting dependency.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .errors import IoFailure, ValidationError
from .evaluate import EvaluationReport, HeterogeneityTrend, SizeStudyReport
from .heterogeneity import HeterogeneityReport, report_to_dict as heterogeneity_to_dict

FORMATS = ("csv", "json", "svg_plot")


def comparison_to_dict(report: EvaluationReport, include_decisions: bool = False) -> dict:
    per_trial = []
    improvements = report.improvements() if {"cnn_varied", "cnn_uniform"} <= set(report.methods) else None
    for t in range(report.n_trials):
        row = {
            "trial": t,
            "h": report.per_trial_h[t],
            "accuracy": {m: report.trial(t, m).accuracy for m in report.methods},
            "fallbacks": {m: report.trial(t, m).fallback_count for m in report.methods},
            "seed_purpose": report.trial(t, "uniform_only").seed_purpose
            if "uniform_only" in report.methods
            else "",
        }
        if improvements is not None:
            row["improvement"] = float(improvements[t])
        if include_decisions:
            row["decisions"] = {
                m: report.trial(t, m).decisions.tolist() for m in report.methods
            }
        per_trial.append(row)
    return {
        "type": "comparison",
        "config": report.config,
        "methods": list(report.methods),
        "n_trials": report.n_trials,
        "aggregates": {
            m: {
                "mean_accuracy": report.mean_accuracy(m),
                "std_accuracy": report.std_accuracy(m),
            }
            for m in report.methods
        },
        "per_trial": per_trial,
    }


def size_study_to_dict(report: SizeStudyReport) -> dict:
    return {
        "type": "size_study",
        "config": report.config,
        "sizes": list(report.sizes),
        "per_size": [
            {
                "size": size,
                "accuracies": list(report.accuracies[i]),
                "mean_accuracy": report.mean_accuracy(size),
                "std_accuracy": report.std_accuracy(size),
            }
            for i, size in enumerate(report.sizes)
        ],
    }


def trend_to_dict(trend: HeterogeneityTrend) -> dict:
    return {
        "type": "heterogeneity_trend",
        "rank_correlation": trend.rank_correlation,
        "per_trial": [
            {"trial": t, "h": h, "improvement": gain} for t, h, gain in trend.rows
        ],
    }


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def comparison_csv(data: dict) -> str:
    methods = data["methods"]
    header = ["trial"] + [f"acc_{m}" for m in methods] + [f"fallback_{m}" for m in methods] + ["h"]
    has_improvement = data["per_trial"] and "improvement" in data["per_trial"][0]
    if has_improvement:
        header.append("improvement")
    rows = []
    for row in data["per_trial"]:
        out = [row["trial"]]
        out += [repr(row["accuracy"][m]) for m in methods]
        out += [row["fallbacks"][m] for m in methods]
        out.append(repr(row["h"]))
        if has_improvement:
            out.append(repr(row["improvement"]))
        rows.append(out)
    return _csv_text(header, rows)


def size_study_csv(data: dict) -> str:
    rows = []
    for entry in data["per_size"]:
        for trial, acc in enumerate(entry["accuracies"]):
            rows.append([entry["size"], trial, repr(acc)])
    return _csv_text(["size", "trial", "accuracy"], rows)


def trend_csv(data: dict) -> str:
    rows = [[r["trial"], repr(r["h"]), repr(r["improvement"])] for r in data["per_trial"]]
    return _csv_text(["trial", "h", "improvement"], rows)


# --- minimal SVG rendering -------------------------------------------------

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 40, 60


def _svg_open(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]


def _svg_axes(xlabel: str, ylabel: str) -> list[str]:
    x0, y0, x1, y1 = _ML, _H - _MB, _W - _MR, _MT
    return [
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2:.1f}" y="{_H - 15}" text-anchor="middle">{xlabel}</text>',
        f'<text x="18" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(y0 + y1) / 2:.1f})">{ylabel}</text>',
    ]


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def _svg_y_ticks(lo: float, hi: float) -> list[str]:
    parts = []
    for v in _ticks(lo, hi):
        y = _H - _MB - (v - lo) / ((hi - lo) or 1.0) * (_H - _MB - _MT)
        parts.append(f'<line x1="{_ML - 4}" y1="{y:.1f}" x2="{_ML}" y2="{y:.1f}" stroke="black"/>')
        parts.append(f'<text x="{_ML - 8}" y="{y + 4:.1f}" text-anchor="end">{v:.2f}</text>')
    return parts


def comparison_svg(data: dict) -> str:
    methods = data["methods"]
    means = [data["aggregates"][m]["mean_accuracy"] for m in methods]
    stds = [data["aggregates"][m]["std_accuracy"] for m in methods]
    parts = _svg_open("Accuracy by decision method") + _svg_axes("method", "accuracy")
    parts += _svg_y_ticks(0.0, 1.0)
    plot_w = _W - _ML - _MR
    slot = plot_w / len(methods)
    for i, m in enumerate(methods):
        x = _ML + i * slot + slot * 0.15
        w = slot * 0.7
        h = means[i] * (_H - _MB - _MT)
        y = _H - _MB - h
        cx = x + w / 2
        e0 = _H - _MB - (means[i] - stds[i]) * (_H - _MB - _MT)
        e1 = _H - _MB - (means[i] + stds[i]) * (_H - _MB - _MT)
        parts.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{w:.1f}" height="{h:.1f}" fill="#7aa6c2"/>')
        parts.append(f'<line x1="{cx:.1f}" y1="{e0:.1f}" x2="{cx:.1f}" y2="{e1:.1f}" stroke="black"/>')
        parts.append(
            f'<text x="{cx:.1f}" y="{_H - _MB + 16}" text-anchor="middle" font-size="10">{m}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def trend_svg(data: dict) -> str:
    hs = [r["h"] for r in data["per_trial"]]
    gains = [r["improvement"] for r in data["per_trial"]]
    lo_x, hi_x = min(hs), max(hs)
    lo_y, hi_y = min(gains), max(gains)
    rho = data["rank_correlation"]
    parts = _svg_open(f"Varied-over-uniform gain vs heterogeneity (rho={rho:.3f})")
    parts += _svg_axes("h", "accuracy gain")
    xs = _scale(hs, lo_x, hi_x, _ML, _W - _MR)
    ys = _scale(gains, lo_y, hi_y, _H - _MB, _MT)
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3" fill="#2c6e49" fill-opacity="0.6"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def size_study_svg(data: dict) -> str:
    sizes = [e["size"] for e in data["per_size"]]
    means = [e["mean_accuracy"] for e in data["per_size"]]
    parts = _svg_open("Classifier accuracy vs training images per grasp type")
    parts += _svg_axes("images per grasp type", "accuracy")
    parts += _svg_y_ticks(0.0, 1.0)
    xs = _scale(sizes, min(sizes), max(sizes), _ML, _W - _MR)
    ys = [(_H - _MB) - m * (_H - _MB - _MT) for m in means]
    points = " ".join(f"{x:.1f},{y:.1f}" for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{points}" fill="none" stroke="#b2472f" stroke-width="2"/>')
    for x, y, s in zip(xs, ys, sizes):
        parts.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3" fill="#b2472f"/>')
        parts.append(f'<text x="{x:.1f}" y="{_H - _MB + 16}" text-anchor="middle" font-size="10">{s}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# --- dispatch ---------------------------------------------------------------


def _payload(obj) -> tuple[str, dict]:
    if isinstance(obj, EvaluationReport):
        return "comparison", comparison_to_dict(obj)
    if isinstance(obj, SizeStudyReport):
        return "size_study", size_study_to_dict(obj)
    if isinstance(obj, HeterogeneityTrend):
        return "heterogeneity_trend", trend_to_dict(obj)
    if isinstance(obj, HeterogeneityReport):
        return "heterogeneity", heterogeneity_to_dict(obj)
    if isinstance(obj, dict) and "type" in obj:
        return obj["type"], obj
    raise ValidationError(f"cannot emit object of type {type(obj).__name__}")


_CSV_RENDERERS = {
    "comparison": comparison_csv,
    "size_study": size_study_csv,
    "heterogeneity_trend": trend_csv,
}
_SVG_RENDERERS = {
    "comparison": comparison_svg,
    "size_study": size_study_svg,
    "heterogeneity_trend": trend_svg,
}


def emit(obj, formats, out_dir: str | Path, basename: str | None = None) -> list[Path]:
    """Write a report in the requested formats; returns the paths written."""
    if isinstance(formats, str):
        formats = [formats]
    for fmt in formats:
        if fmt not in FORMATS:
            raise ValidationError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    kind, data = _payload(obj)
    name = basename or kind
    out_dir = Path(out_dir)
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for fmt in formats:
            if fmt == "json":
                path = out_dir / f"{name}.json"
                path.write_text(
                    json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8"
                )
            elif fmt == "csv":
                renderer = _CSV_RENDERERS.get(kind)
                if renderer is None:
                    raise ValidationError(f"no CSV form for report type {kind!r}")
                path = out_dir / f"{name}.csv"
                path.write_text(renderer(data), encoding="utf-8", newline="")
            else:
                renderer = _SVG_RENDERERS.get(kind)
                if renderer is None:
                    raise ValidationError(f"no SVG form for report type {kind!r}")
                path = out_dir / f"{name}.svg"
                path.write_text(renderer(data), encoding="utf-8", newline="")
            written.append(path)
    except OSError as e:
        raise IoFailure(f"failed writing report files to {out_dir}: {e}") from e
    return written
