"""Aggregation of run artifacts into the comparison tables and figures:
per-model summary (table1), per-modulation matrix (table2), base-vs-augmented
comparison (table3), accuracy-vs-parameter-count scatter with a least-squares
trend (fig1), accuracy-vs-SNR curves (fig2), and curriculum bars (fig3).

CSV is the test surface; each figure is also rendered as a self-contained
SVG 1.1 file. Emission is a pure function of the run artifacts."""

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, InvalidInputError
from .sigsynth import CLASS_NAMES

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#444444",
)


@dataclass
class TrendFit:
    slope: float
    intercept: float
    residuals: np.ndarray

    def predict(self, param_count):
        return self.slope * np.log10(param_count) + self.intercept


def fit_trend(points) -> TrendFit:
    """Ordinary least squares of accuracy against log10(parameter count)."""
    points = list(points)
    if len(points) < 2:
        raise InvalidInputError("trend fit needs at least two points")
    x = np.log10([float(p) for p, _ in points])
    y = np.array([float(a) for _, a in points])
    if np.ptp(x) < 1e-12:
        raise InvalidInputError("trend fit needs distinct parameter counts")
    xm, ym = x.mean(), y.mean()
    slope = float(np.sum((x - xm) * (y - ym)) / np.sum((x - xm) ** 2))
    intercept = float(ym - slope * xm)
    return TrendFit(slope, intercept, y - (slope * x + intercept))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _check_same_corpus(runs):
    hashes = {run.corpus_hash for run in runs}
    if len(hashes) > 1:
        raise ConsistencyError(
            f"runs span {len(hashes)} different corpora; report needs one"
        )


def _acc4(a):
    return f"{float(a):.4f}"


def _acc2(a):
    return f"{float(a):.2f}"


def emit_tables(runs, out_dir) -> dict:
    """table1/table2/table3 CSVs. Returns {name: path}."""
    if not runs:
        raise InvalidInputError("no runs given")
    _check_same_corpus(runs)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}

    base_runs = [r for r in runs if not r.is_augmented]
    rows = [
        [r.model_id, r.summary["param_count"], r.summary["batch_size"],
         r.summary["learning_rate"], r.summary["stop_epoch"],
         _acc4(r.overall_accuracy)]
        for r in base_runs
    ]
    path = out_dir / "table1.csv"
    path.write_text(_csv_text(
        ["model", "param_count", "batch_size", "learning_rate", "stop_epoch",
         "test_accuracy"], rows), "utf-8")
    written["table1"] = path

    rows = [
        [r.display_name] + [
            _acc2(r.per_modulation[name]) if name in r.per_modulation else ""
            for name in CLASS_NAMES
        ]
        for r in runs
    ]
    path = out_dir / "table2.csv"
    path.write_text(_csv_text(["model", *CLASS_NAMES], rows), "utf-8")
    written["table2"] = path

    augmented = {r.model_id: r for r in runs if r.is_augmented}
    rows = []
    for r in base_runs:
        aug = augmented.get(r.model_id)
        if aug is None:
            continue
        delta = aug.overall_accuracy - r.overall_accuracy
        rows.append([r.model_id, _acc4(r.overall_accuracy),
                     _acc4(aug.overall_accuracy), _acc4(delta)])
    path = out_dir / "table3.csv"
    path.write_text(_csv_text(
        ["model", "test_accuracy", "modified_test_accuracy", "delta"], rows),
        "utf-8")
    written["table3"] = path
    return written


def emit_figures(runs, out_dir, curriculum_run=None) -> dict:
    """fig1 (scatter + trend), fig2 (accuracy vs SNR), and, when a curriculum
    run is present, fig3 (grouped bars). Each figure is CSV + SVG."""
    if not runs:
        raise InvalidInputError("no runs given")
    _check_same_corpus(runs)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}

    points = [(int(r.summary["param_count"]), r.overall_accuracy) for r in runs]
    names = [r.display_name for r in runs]
    trend = fit_trend(points) if len(set(p for p, _ in points)) >= 2 else None
    rows = [[n, p, f"{a:.6f}"] for n, (p, a) in zip(names, points)]
    path = out_dir / "fig1.csv"
    path.write_text(_csv_text(["model", "param_count", "test_accuracy"], rows), "utf-8")
    written["fig1_csv"] = path
    written["fig1_svg"] = _fig1_svg(out_dir / "fig1.svg", names, points, trend)

    for r in runs:
        if not r.per_snr:
            raise InvalidInputError(f"{r.display_name}: missing per-SNR breakdown")
    snrs = sorted({s for r in runs for s in r.per_snr})
    rows = [
        [snr] + [
            f"{r.per_snr[snr]:.6f}" if snr in r.per_snr else "" for r in runs
        ]
        for snr in snrs
    ]
    path = out_dir / "fig2.csv"
    path.write_text(_csv_text(["snr_db", *names], rows), "utf-8")
    written["fig2_csv"] = path
    series = {
        r.display_name: [(s, r.per_snr[s]) for s in snrs if s in r.per_snr]
        for r in runs
    }
    written["fig2_svg"] = _fig2_svg(out_dir / "fig2.svg", series)

    if curriculum_run is not None:
        if curriculum_run.curriculum is None:
            raise InvalidInputError(f"{curriculum_run.path} has no curriculum.csv")
        rows = [
            [c["scenario"], c["acc_low"], c["acc_high"], c["acc_overall"]]
            for c in curriculum_run.curriculum
        ]
        path = out_dir / "fig3.csv"
        path.write_text(_csv_text(
            ["scenario", "acc_low", "acc_high", "acc_overall"], rows), "utf-8")
        written["fig3_csv"] = path
        written["fig3_svg"] = _fig3_svg(out_dir / "fig3.svg", curriculum_run.curriculum)
    return written


# ---------------------------------------------------------------------------
# svg rendering (deterministic, no external references)

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 20, 20, 60


def _svg_open(title):
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<title>{title}</title>',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]


def _axes(parts, xlabel, ylabel):
    parts.append(
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" '
        'stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" '
        'stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2:.0f}" y="{_H - 14}" font-size="13" '
        f'text-anchor="middle" font-family="sans-serif">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{(_MT + _H - _MB) / 2:.0f}" font-size="13" '
        f'text-anchor="middle" font-family="sans-serif" '
        f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.0f})">{ylabel}</text>'
    )


def _scale(lo, hi, pixel_lo, pixel_hi):
    span = hi - lo if hi > lo else 1.0

    def to_px(v):
        return pixel_lo + (v - lo) / span * (pixel_hi - pixel_lo)

    return to_px


def _ticks(parts, to_x, to_y, xticks, yticks, xfmt=str):
    for v in xticks:
        x = to_x(v)
        parts.append(
            f'<line x1="{x:.1f}" y1="{_H - _MB}" x2="{x:.1f}" y2="{_H - _MB + 4}" '
            'stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{_H - _MB + 18}" font-size="11" '
            f'text-anchor="middle" font-family="sans-serif">{xfmt(v)}</text>'
        )
    for v in yticks:
        y = to_y(v)
        parts.append(
            f'<line x1="{_ML - 4}" y1="{y:.1f}" x2="{_ML}" y2="{y:.1f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{y + 4:.1f}" font-size="11" '
            f'text-anchor="end" font-family="sans-serif">{v:g}</text>'
        )


def _legend(parts, names):
    for i, name in enumerate(names):
        x = _ML + 8 + 150 * (i % 4)
        y = _MT + 14 * (i // 4)
        color = PALETTE[i % len(PALETTE)]
        parts.append(f'<rect x="{x}" y="{y - 8}" width="10" height="10" fill="{color}"/>')
        parts.append(
            f'<text x="{x + 14}" y="{y + 1}" font-size="11" '
            f'font-family="sans-serif">{name}</text>'
        )


def _fig1_svg(path, names, points, trend):
    logs = [np.log10(p) for p, _ in points]
    accs = [a for _, a in points]
    x_lo, x_hi = min(logs) - 0.2, max(logs) + 0.2
    to_x = _scale(x_lo, x_hi, _ML, _W - _MR)
    to_y = _scale(0.0, 1.0, _H - _MB, _MT)
    parts = _svg_open("test accuracy vs trainable parameter count")
    _axes(parts, "trainable parameters (log10)", "test accuracy")
    _ticks(parts, to_x, to_y,
           [round(t, 1) for t in np.arange(np.ceil(x_lo * 2) / 2, x_hi, 0.5)],
           [0, 0.2, 0.4, 0.6, 0.8, 1.0])
    if trend is not None:
        y1, y2 = trend.slope * x_lo + trend.intercept, trend.slope * x_hi + trend.intercept
        parts.append(
            f'<line x1="{to_x(x_lo):.1f}" y1="{to_y(y1):.1f}" '
            f'x2="{to_x(x_hi):.1f}" y2="{to_y(y2):.1f}" stroke="red" stroke-width="1.5"/>'
        )
    for i, (lg, acc) in enumerate(zip(logs, accs)):
        color = PALETTE[i % len(PALETTE)]
        parts.append(
            f'<circle cx="{to_x(lg):.1f}" cy="{to_y(acc):.1f}" r="4" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{to_x(lg) + 6:.1f}" y="{to_y(acc) - 6:.1f}" font-size="10" '
            f'font-family="sans-serif">{names[i]}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", "utf-8")
    return Path(path)


def _fig2_svg(path, series):
    snrs = sorted({s for pts in series.values() for s, _ in pts})
    to_x = _scale(min(snrs), max(snrs), _ML, _W - _MR)
    to_y = _scale(0.0, 1.0, _H - _MB, _MT)
    parts = _svg_open("test accuracy vs SNR")
    _axes(parts, "SNR (dB)", "test accuracy")
    _ticks(parts, to_x, to_y, [s for s in snrs if s % 4 == 0 or len(snrs) < 8],
           [0, 0.2, 0.4, 0.6, 0.8, 1.0])
    for i, (name, pts) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{to_x(s):.1f},{to_y(a):.1f}" for s, a in pts)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
    _legend(parts, list(series))
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", "utf-8")
    return Path(path)


def _fig3_svg(path, curriculum_rows):
    n = len(curriculum_rows)
    to_y = _scale(0.0, 1.0, _H - _MB, _MT)
    group_w = (_W - _ML - _MR) / max(n, 1)
    bar_w = group_w / 4.0
    parts = _svg_open("accuracy by training SNR range")
    _axes(parts, "training SNR range (dB)", "test accuracy")
    _ticks(parts, lambda v: v, to_y, [], [0, 0.2, 0.4, 0.6, 0.8, 1.0])
    colors = {"acc_low": PALETTE[0], "acc_high": PALETTE[1], "acc_overall": PALETTE[2]}
    for i, row in enumerate(curriculum_rows):
        x0 = _ML + i * group_w
        for j, key in enumerate(("acc_low", "acc_high", "acc_overall")):
            value = float(row[key])
            x = x0 + (j + 0.25) * bar_w
            y = to_y(value)
            parts.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w:.1f}" '
                f'height="{_H - _MB - y:.1f}" fill="{colors[key]}"/>'
            )
        parts.append(
            f'<text x="{x0 + group_w / 2:.1f}" y="{_H - _MB + 16}" font-size="9" '
            f'text-anchor="middle" font-family="sans-serif" '
            f'transform="rotate(-45 {x0 + group_w / 2:.1f} {_H - _MB + 16})">'
            f'{row["scenario"]}</text>'
        )
    _legend(parts, ["low (&lt;0 dB)", "high (&#8805;0 dB)", "overall"])
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", "utf-8")
    return Path(path)
