"""Aggregation of experiment records into curves, group summaries, runtime
ratios, and SVG chart artifacts.

Curves are normalized to each algorithm's full-training-set mean, since
the analysis is phrased as percentage decreases from full-data
performance; absolute means are kept alongside. Standard deviations over
seeds use the population formula (descriptive, small n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DataError
from .runner import ExperimentRecord

SVG_NS = "http://www.w3.org/2000/svg"

_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79",
)


@dataclass(frozen=True)
class GroupMap:
    group1: frozenset[str]
    group2: frozenset[str]

    def __post_init__(self):
        if self.group1 & self.group2:
            raise DataError(f"groups overlap: {sorted(self.group1 & self.group2)}")
        if "random" in self.group1 | self.group2:
            raise DataError("the random baseline belongs to neither group")

    def group_of(self, kind: str) -> str | None:
        if kind in self.group1:
            return "group1"
        if kind in self.group2:
            return "group2"
        return None


# group1 degrades steeply under downsampling, group2 gradually; the random
# floor belongs to neither.
DEFAULT_GROUPS = GroupMap(
    group1=frozenset({"user_knn", "svd", "item_knn", "item_knn_binary", "nmf"}),
    group2=frozenset({"bias", "popularity", "popularity_binary", "funk_svd", "biased_mf"}),
)


@dataclass(frozen=True)
class CurvePoint:
    mean: float
    std: float
    relative: float


@dataclass(frozen=True)
class Curve:
    algorithm: str
    points: Mapping[float, CurvePoint]

    def fractions(self) -> list[float]:
        return sorted(self.points)


def _ok_records(records: Iterable[ExperimentRecord]) -> list[ExperimentRecord]:
    return [r for r in records if r.status == "ok" and r.ndcg_mean is not None]


def build_curves(records: Sequence[ExperimentRecord]) -> list[Curve]:
    """Mean/std over seeds per (algorithm, fraction), normalized at 1.0.

    Failed records are ignored. Every algorithm must carry a
    fraction-1.0 row to anchor the normalization.
    """
    ok = _ok_records(records)
    by_algo: dict[str, dict[float, list[float]]] = {}
    for rec in ok:
        by_algo.setdefault(rec.algorithm, {}).setdefault(rec.fraction, []).append(
            rec.ndcg_mean
        )
    curves = []
    for algo in sorted(by_algo):
        values = by_algo[algo]
        if 1.0 not in values:
            raise DataError(f"algorithm {algo!r} has no fraction-1.0 baseline record")
        base = _mean(values[1.0])
        points = {}
        for fraction, vals in values.items():
            mean = _mean(vals)
            std = _pop_std(vals)
            relative = 1.0 if fraction == 1.0 else (mean / base if base != 0 else math.nan)
            points[fraction] = CurvePoint(mean=mean, std=std, relative=relative)
        curves.append(Curve(algorithm=algo, points=points))
    return curves


def _mean(vals: Sequence[float]) -> float:
    return math.fsum(vals) / len(vals)


def _pop_std(vals: Sequence[float]) -> float:
    m = _mean(vals)
    return math.sqrt(math.fsum((v - m) ** 2 for v in vals) / len(vals))


def group_summary(
    curves: Sequence[Curve],
    groups: GroupMap,
    at_fractions: Sequence[float],
) -> dict[str, dict[float, float]]:
    """Per-group mean relative drop, in percent, at each fraction.

    drop(p) = 100 * (1 - mean over members of relative value at p).
    Every group member must be present in ``curves``.
    """
    by_name = {c.algorithm: c for c in curves}
    out: dict[str, dict[float, float]] = {}
    for group_name, members in (("group1", groups.group1), ("group2", groups.group2)):
        if not members:
            continue
        drops = {}
        for fraction in at_fractions:
            rels = []
            for member in sorted(members):
                curve = by_name.get(member)
                if curve is None:
                    raise DataError(f"{group_name} member {member!r} missing from curves")
                if fraction not in curve.points:
                    raise DataError(
                        f"{group_name} member {member!r} has no record at fraction {fraction}"
                    )
                rels.append(curve.points[fraction].relative)
            drops[fraction] = 100.0 * (1.0 - _mean(rels))
        out[group_name] = drops
    return out


def runtime_ratios(records: Sequence[ExperimentRecord]) -> dict[str, dict[float, float]]:
    """Per-algorithm (fit+eval) runtime relative to the fraction-1.0 runtime.

    Runtimes are summed over seeds before dividing, so the ratio at 1.0 is
    exactly 1. Algorithms without a fraction-1.0 runtime are omitted.
    """
    totals: dict[str, dict[float, float]] = {}
    for rec in _ok_records(records):
        if rec.fit_seconds is None or rec.eval_seconds is None:
            continue
        totals.setdefault(rec.algorithm, {}).setdefault(rec.fraction, 0.0)
        totals[rec.algorithm][rec.fraction] += rec.fit_seconds + rec.eval_seconds
    ratios: dict[str, dict[float, float]] = {}
    for algo, per_fraction in totals.items():
        base = per_fraction.get(1.0)
        if not base:
            continue
        ratios[algo] = {
            fraction: (1.0 if fraction == 1.0 else total / base)
            for fraction, total in per_fraction.items()
        }
    return ratios


def emit_report(
    records: Sequence[ExperimentRecord],
    groups: GroupMap,
    out_dir: str | Path,
) -> list[Path]:
    """Write curves.csv, groups.csv, runtime_ratios.csv, and the SVG charts.

    Records spanning several datasets get one subdirectory per dataset for
    the CSVs; charts are always ``<dataset>_curves.svg`` and
    ``<dataset>_groups_50v100.svg`` at the top level. Group summaries
    cover the group members that actually appear in the records, so
    partial grids still report.
    """
    records = list(records)
    if not records:
        raise DataError("no records to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not out.is_dir():
        raise DataError(f"output directory {out} is not writable")

    datasets = sorted({r.dataset for r in records})
    written: list[Path] = []
    for dataset in datasets:
        subset = [r for r in records if r.dataset == dataset]
        target = out if len(datasets) == 1 else out / dataset
        target.mkdir(parents=True, exist_ok=True)

        curves = build_curves(subset)
        fractions = sorted({f for c in curves for f in c.points})
        written.append(_write_curves_csv(target / "curves.csv", curves))
        present = {c.algorithm for c in curves}
        trimmed = GroupMap(
            group1=groups.group1 & present, group2=groups.group2 & present
        )
        shared = [
            f for f in fractions
            if all(
                f in c.points
                for c in curves
                if c.algorithm in (trimmed.group1 | trimmed.group2)
            )
        ]
        summary = group_summary(curves, trimmed, shared)
        written.append(_write_groups_csv(target / "groups.csv", summary))
        ratios = runtime_ratios(subset)
        written.append(_write_ratios_csv(target / "runtime_ratios.csv", ratios))

        written.append(_write_curves_svg(out / f"{dataset}_curves.svg", dataset, curves))
        box_path = out / f"{dataset}_groups_50v100.svg"
        written.append(_write_groups_svg(box_path, dataset, subset, groups))
    return written


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_curves_csv(path: Path, curves: Sequence[Curve]) -> Path:
    lines = ["algorithm,fraction,mean,std,relative"]
    for curve in curves:
        for fraction in curve.fractions():
            pt = curve.points[fraction]
            lines.append(
                f"{curve.algorithm},{fraction:.2f},{_fmt(pt.mean)},{_fmt(pt.std)},{_fmt(pt.relative)}"
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _write_groups_csv(path: Path, summary: dict[str, dict[float, float]]) -> Path:
    lines = ["group,fraction,drop_pct"]
    for group in sorted(summary):
        for fraction in sorted(summary[group]):
            lines.append(f"{group},{fraction:.2f},{_fmt(summary[group][fraction])}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _write_ratios_csv(path: Path, ratios: dict[str, dict[float, float]]) -> Path:
    lines = ["algorithm,fraction,ratio"]
    for algo in sorted(ratios):
        for fraction in sorted(ratios[algo]):
            lines.append(f"{algo},{fraction:.2f},{_fmt(ratios[algo][fraction])}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


_W, _H = 720, 480
_ML, _MR, _MT, _MB = 70, 180, 40, 50


def _x_of(fraction: float, lo: float, hi: float) -> float:
    span = hi - lo or 1.0
    return _ML + (fraction - lo) / span * (_W - _ML - _MR)


def _y_of(value: float, hi: float) -> float:
    hi = hi or 1.0
    return _H - _MB - (value / hi) * (_H - _MT - _MB)


def _svg_open(title: str) -> list[str]:
    return [
        f'<svg xmlns="{SVG_NS}" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f"  <title>{title}</title>",
        "  <desc>means and population-formula standard deviations over seeds; "
        "curves normalized to the fraction-1.0 mean</desc>",
        f'  <rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
    ]


def _axes(x_label: str, y_label: str) -> list[str]:
    return [
        f'  <line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
        f'  <line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
        f'  <text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 12}" text-anchor="middle" font-size="13">{x_label}</text>',
        f'  <text x="16" y="{(_MT + _H - _MB) / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.1f})">{y_label}</text>',
    ]


def _write_curves_svg(path: Path, dataset: str, curves: Sequence[Curve]) -> Path:
    fractions = sorted({f for c in curves for f in c.points})
    lo, hi = fractions[0], fractions[-1]
    y_max = max(
        (pt.relative for c in curves for pt in c.points.values() if not math.isnan(pt.relative)),
        default=1.0,
    )
    y_max = max(y_max, 1.0) * 1.05
    parts = _svg_open(f"{dataset}: relative nDCG@10 vs training fraction")
    parts += _axes("training fraction", "nDCG@10 relative to full training set")
    for fraction in fractions:
        x = _x_of(fraction, lo, hi)
        parts.append(
            f'  <text x="{x:.1f}" y="{_H - _MB + 16}" text-anchor="middle" font-size="11">{fraction:.1f}</text>'
        )
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = _y_of(tick * y_max, y_max)
        parts.append(
            f'  <text x="{_ML - 8}" y="{y:.1f}" text-anchor="end" font-size="11">{tick * y_max:.2f}</text>'
        )
    for idx, curve in enumerate(curves):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(
            f"{_x_of(f, lo, hi):.1f},{_y_of(curve.points[f].relative, y_max):.1f}"
            for f in curve.fractions()
            if not math.isnan(curve.points[f].relative)
        )
        parts.append(
            f'  <polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{pts}" data-algorithm="{curve.algorithm}"/>'
        )
        ly = _MT + 14 * (idx + 1)
        parts.append(
            f'  <line x1="{_W - _MR + 8}" y1="{ly - 4}" x2="{_W - _MR + 28}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'  <text x="{_W - _MR + 34}" y="{ly}" font-size="11">{curve.algorithm}</text>'
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return path


def _quartiles(values: Sequence[float]) -> tuple[float, float, float, float, float]:
    vs = sorted(values)
    n = len(vs)

    def q(p: float) -> float:
        if n == 1:
            return vs[0]
        pos = p * (n - 1)
        lo = int(math.floor(pos))
        hi = min(lo + 1, n - 1)
        frac = pos - lo
        return vs[lo] * (1 - frac) + vs[hi] * frac

    return vs[0], q(0.25), q(0.5), q(0.75), vs[-1]


def _write_groups_svg(
    path: Path,
    dataset: str,
    records: Sequence[ExperimentRecord],
    groups: GroupMap,
) -> Path:
    """Box summaries of absolute nDCG per group at half vs. full training."""
    ok = _ok_records(records)
    fractions = sorted({r.fraction for r in ok})
    if not fractions:
        raise DataError("no successful records for the group chart")
    half = min(fractions, key=lambda f: abs(f - 0.5))
    full = max(fractions)
    dists: list[tuple[str, list[float]]] = []
    for group_name, members in (("group1", groups.group1), ("group2", groups.group2)):
        for fraction in (half, full):
            vals = [
                r.ndcg_mean
                for r in ok
                if r.algorithm in members and r.fraction == fraction
            ]
            dists.append((f"{group_name} @{fraction:.0%}", vals))
    y_max = max((v for _, vals in dists for v in vals), default=1.0) * 1.15 or 1.0
    parts = _svg_open(f"{dataset}: nDCG@10 distributions at {half:.0%} vs {full:.0%} training")
    parts += _axes("", "nDCG@10")
    slot_w = (_W - _ML - _MR) / len(dists)
    for idx, (label, vals) in enumerate(dists):
        cx = _ML + slot_w * (idx + 0.5)
        parts.append(
            f'  <text x="{cx:.1f}" y="{_H - _MB + 16}" text-anchor="middle" font-size="11">{label}</text>'
        )
        if not vals:
            continue
        mn, q1, med, q3, mx = _quartiles(vals)
        color = _PALETTE[0] if label.startswith("group1") else _PALETTE[1]
        bw = slot_w * 0.4
        parts.append(
            f'  <line x1="{cx:.1f}" y1="{_y_of(mn, y_max):.1f}" x2="{cx:.1f}" '
            f'y2="{_y_of(mx, y_max):.1f}" stroke="{color}" data-part="whisker"/>'
        )
        parts.append(
            f'  <rect x="{cx - bw / 2:.1f}" y="{_y_of(q3, y_max):.1f}" width="{bw:.1f}" '
            f'height="{abs(_y_of(q1, y_max) - _y_of(q3, y_max)):.1f}" fill="{color}" '
            f'fill-opacity="0.35" stroke="{color}" data-part="box"/>'
        )
        parts.append(
            f'  <line x1="{cx - bw / 2:.1f}" y1="{_y_of(med, y_max):.1f}" x2="{cx + bw / 2:.1f}" '
            f'y2="{_y_of(med, y_max):.1f}" stroke="{color}" stroke-width="2" data-part="median"/>'
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return path
