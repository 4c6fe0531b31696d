"""Ranking metrics and the benchmark / robustness-sweep runners.

Scores are oriented so that higher means "more likely Generated"; Generated
is the positive class.  AUROC uses midranks for ties.  AP is the
non-interpolated step sum with tied scores grouped into a single threshold.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from regap.dataio import GENERATED, Sample
from regap.detector import (
    AggregationRule,
    aggregate,
    calibrate_threshold,
    compute_image_errors,
    parallel_map,
)
from regap.edits import EditKind
from regap.metrics import MetricConfig, MetricKind, distance
from regap.robustness import center_crop_resize, jpeg_roundtrip

AXES = ("jpeg-quality", "crop-ratio")


def _positives(labels) -> np.ndarray:
    lab = list(labels)
    if lab and isinstance(lab[0], str):
        return np.array([x == GENERATED for x in lab], dtype=bool)
    return np.asarray(lab, dtype=bool)


def _scores(scores) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    return s


def accuracy(scores, labels, tau: float) -> float:
    s, pos = _scores(scores), _positives(labels)
    if s.size == 0:
        raise ValueError("accuracy of an empty sample list")
    return float(np.mean((s > tau) == pos))


def midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties replaced by the mean of their positions."""
    order = np.argsort(values, kind="mergesort")
    sorted_v = values[order]
    ranks = np.empty(values.size, dtype=np.float64)
    start = 0
    n = values.size
    while start < n:
        stop = start + 1
        while stop < n and sorted_v[stop] == sorted_v[start]:
            stop += 1
        ranks[order[start:stop]] = 0.5 * (start + 1 + stop)
        start = stop
    return ranks


def auroc(scores, labels) -> float:
    """Mann-Whitney estimate ``P(s_pos > s_neg) + P(tie) / 2``."""
    s, pos = _scores(scores), _positives(labels)
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUROC needs at least one positive and one negative sample")
    r = midranks(s)
    u = r[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def average_precision(scores, labels) -> float:
    s, pos = _scores(scores), _positives(labels)
    n_pos = int(pos.sum())
    if n_pos == 0:
        raise ValueError("average precision needs at least one positive sample")
    order = np.argsort(-s, kind="mergesort")
    s, pos = s[order], pos[order]
    tp = np.cumsum(pos)
    # last index of each group of equal scores
    ends = np.flatnonzero(np.append(s[1:] != s[:-1], True))
    tp_at = tp[ends].astype(np.float64)
    precision = tp_at / (ends + 1)
    recall = tp_at / n_pos
    prev = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - prev) * precision))


@dataclass(frozen=True)
class EvalReport:
    acc: float
    auroc: float
    ap: float
    n_pos: int
    n_neg: int
    tau: float


def evaluate_scores(scores, labels, tau: float) -> EvalReport:
    pos = _positives(labels)
    return EvalReport(
        acc=accuracy(scores, pos, tau),
        auroc=auroc(scores, pos),
        ap=average_precision(scores, pos),
        n_pos=int(pos.sum()),
        n_neg=int((~pos).sum()),
        tau=float(tau),
    )


# ---------------------------------------------------------------- scoring


@dataclass
class ScoreTable:
    """Per-image static error and per-edit deltas for one metric."""

    e_pre: np.ndarray
    deltas: np.ndarray  # (n_images, n_edits)
    edit_names: list[str]

    def scores(self, row: str) -> np.ndarray:
        """Scores of a benchmark row: an edit name, ``M-E <rule>`` or ``Static``."""
        if row == "Static":
            return -self.e_pre
        if row.startswith("M-E "):
            rule = AggregationRule(row[4:])
            return np.array([aggregate(d, rule) for d in self.deltas])
        return self.deltas[:, self.edit_names.index(row)]


def _edit_row_names(edit_set) -> list[str]:
    seen: dict[str, int] = {}
    names = []
    for kind, _ in edit_set:
        k = EditKind(kind).value
        seen[k] = seen.get(k, 0) + 1
        names.append(k if seen[k] == 1 else f"{k}#{seen[k]}")
    return names


def compute_caches(model, edit_set, images: Sequence[np.ndarray], master_seed: int, prior=None):
    return parallel_map(
        lambda i: compute_image_errors(model, edit_set, images[i], master_seed, i, prior), range(len(images))
    )


def score_table(caches, metric, metric_cfg: MetricConfig, edit_names) -> ScoreTable:
    metric = MetricKind(metric)

    def one(c):
        e_pre = distance(metric, metric_cfg, c.x, c.recon)
        post = [distance(metric, metric_cfg, xe, re) for xe, re in zip(c.edited, c.edited_recon)]
        return e_pre, [p - e_pre for p in post]

    rows = [one(c) for c in caches]
    return ScoreTable(np.array([r[0] for r in rows]), np.array([r[1] for r in rows]), list(edit_names))


# ---------------------------------------------------------------- benchmark


@dataclass
class BenchmarkRow:
    row: str
    metric: str
    tau_mode: str
    report: EvalReport


@dataclass
class BenchmarkResult:
    rows: dict[str, list[BenchmarkRow]] = field(default_factory=dict)

    def find(self, metric: str, row: str) -> BenchmarkRow:
        for r in self.rows[metric]:
            if r.row == row:
                return r
        raise KeyError(f"{metric}/{row}")

    def summary(self) -> str:
        lines = []
        for metric, rows in self.rows.items():
            lines.append(f"metric {metric}")
            lines.append(f"  {'row':<12}{'ACC':>10}{'AUROC':>10}{'AP':>10}{'tau':>14}")
            for r in rows:
                p = r.report
                lines.append(f"  {r.row:<12}{p.acc:>10.4f}{p.auroc:>10.4f}{p.ap:>10.4f}{p.tau:>14.6f}")
        return "\n".join(lines) + "\n"


BENCHMARK_COLUMNS = ["row", "metric", "tau_mode", "tau", "acc", "auroc", "ap", "n_pos", "n_neg"]


def _f6(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.6f}"


def _split_arrays(calibration: Sequence[Sample], evaluation: Sequence[Sample]):
    images = [s.image for s in calibration] + [s.image for s in evaluation]
    labels = [s.label for s in calibration] + [s.label for s in evaluation]
    return images, labels, len(calibration)


def _eval_row(scores, labels, n_cal, retention, fixed_tau):
    cal_real = [s for s, lab in zip(scores[:n_cal], labels[:n_cal]) if lab != GENERATED]
    if fixed_tau is not None:
        tau, mode = float(fixed_tau), "fixed"
    else:
        tau, mode = calibrate_threshold(cal_real, retention).tau, "calibrated"
    return evaluate_scores(scores[n_cal:], labels[n_cal:], tau), mode


def run_benchmark(
    model,
    calibration: Sequence[Sample],
    evaluation: Sequence[Sample],
    edit_set,
    metrics: Sequence[str],
    aggregations: Sequence[str],
    master_seed: int,
    retention: float = 0.95,
    fixed_tau: float | None = None,
    metric_cfg: MetricConfig | None = None,
    prior=None,
    output_dir=None,
) -> BenchmarkResult:
    """Grid of (single edits, M-E rules, Static baseline) x metrics.

    ``tau`` is calibrated on the calibration reals of each row unless
    ``fixed_tau`` is given; the static row (score ``-e_pre``) is always
    calibrated since a Δe threshold does not apply to it.
    """
    edit_set = list(edit_set)
    metric_cfg = metric_cfg or MetricConfig()
    images, labels, n_cal = _split_arrays(calibration, evaluation)
    caches = compute_caches(model, edit_set, images, master_seed, prior)
    names = _edit_row_names(edit_set)
    rows = names + [f"M-E {AggregationRule(a).value}" for a in aggregations] + ["Static"]
    result = BenchmarkResult()
    for metric in metrics:
        metric = MetricKind(metric).value
        table = score_table(caches, metric, metric_cfg, names)
        out = []
        for row in rows:
            scores = table.scores(row)
            tau = None if row == "Static" else fixed_tau
            report, mode = _eval_row(scores, labels, n_cal, retention, tau)
            out.append(BenchmarkRow(row, metric, mode, report))
        result.rows[metric] = out
    if output_dir is not None:
        write_benchmark(result, output_dir)
    return result


def write_benchmark(result: BenchmarkResult, output_dir) -> list[Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for metric, rows in result.rows.items():
        path = out / f"benchmark_{metric}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(BENCHMARK_COLUMNS)
            for r in rows:
                p = r.report
                w.writerow([r.row, metric, r.tau_mode, _f6(p.tau), _f6(p.acc), _f6(p.auroc), _f6(p.ap), p.n_pos, p.n_neg])
        paths.append(path)
    (out / "benchmark_summary.txt").write_text(result.summary())
    return paths


# ---------------------------------------------------------------- robustness sweep


@dataclass
class SweepPoint:
    parameter: float
    tau_mode: str
    report: EvalReport


@dataclass
class SweepCurve:
    axis: str
    metric: str
    aggregation: str
    points: list[SweepPoint]

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return [(p.parameter, p.report.ap) for p in self.points]


def perturb(axis: str, image: np.ndarray, parameter) -> np.ndarray:
    if axis == "jpeg-quality":
        return jpeg_roundtrip(image, int(parameter))
    if axis == "crop-ratio":
        return center_crop_resize(image, float(parameter))
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {AXES}")


def _check_grid(axis: str, grid) -> list:
    if axis not in AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {AXES}")
    grid = list(grid)
    if not grid:
        raise ValueError("sweep grid must not be empty")
    diffs = np.diff(np.asarray(grid, dtype=np.float64))
    if diffs.size and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ValueError("sweep grid must be strictly monotone")
    return grid


def robustness_sweep(
    model,
    calibration: Sequence[Sample],
    evaluation: Sequence[Sample],
    edit_set,
    axis: str,
    grid,
    master_seed: int,
    metric: str = "MSE",
    aggregation: str = "Max",
    retention: float = 0.95,
    tau_mode: str = "recalibrate",
    fixed_tau: float | None = None,
    metric_cfg: MetricConfig | None = None,
    prior=None,
    output_dir=None,
) -> SweepCurve:
    """Perturb every image (both classes, both splits), then detect.

    ``tau_mode`` picks the threshold per point: ``recalibrate`` on the
    perturbed calibration reals, ``unperturbed`` from the clean calibration
    reals, or ``fixed``.  AUROC and AP do not depend on it.
    """
    grid = _check_grid(axis, grid)
    edit_set = list(edit_set)
    metric_cfg = metric_cfg or MetricConfig()
    names = _edit_row_names(edit_set)
    row = f"M-E {AggregationRule(aggregation).value}"
    images, labels, n_cal = _split_arrays(calibration, evaluation)

    clean_tau = None
    if tau_mode == "unperturbed":
        caches = compute_caches(model, edit_set, images, master_seed, prior)
        table = score_table(caches, metric, metric_cfg, names)
        scores = table.scores(row)
        clean_tau = _eval_row(scores, labels, n_cal, retention, None)[0].tau
    elif tau_mode == "fixed":
        if fixed_tau is None:
            raise ValueError("tau_mode 'fixed' needs fixed_tau")
    elif tau_mode != "recalibrate":
        raise ValueError(f"unknown tau_mode {tau_mode!r}")

    points = []
    for param in grid:
        perturbed = parallel_map(lambda x: perturb(axis, x, param), images)
        caches = compute_caches(model, edit_set, perturbed, master_seed, prior)
        table = score_table(caches, metric, metric_cfg, names)
        scores = table.scores(row)
        tau = {"recalibrate": None, "unperturbed": clean_tau, "fixed": fixed_tau}[tau_mode]
        report, _ = _eval_row(scores, labels, n_cal, retention, tau)
        points.append(SweepPoint(float(param), tau_mode, report))
    curve = SweepCurve(axis, MetricKind(metric).value, AggregationRule(aggregation).value, points)
    if output_dir is not None:
        write_sweep(curve, output_dir)
    return curve


SWEEP_COLUMNS = ["axis", "parameter", "metric", "aggregation", "tau_mode", "tau", "acc", "auroc", "ap"]


def write_sweep(curve: SweepCurve, output_dir) -> tuple[Path, Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"sweep_{curve.axis}.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for p in curve.points:
            r = p.report
            w.writerow([curve.axis, _f6(p.parameter), curve.metric, curve.aggregation, p.tau_mode,
                        _f6(r.tau), _f6(r.acc), _f6(r.auroc), _f6(r.ap)])
    dat_path = out / f"sweep_{curve.axis}.dat"
    lines = [f"# {curve.axis} ap"] + [f"{_f6(x)} {_f6(y)}" for x, y in curve.pairs]
    dat_path.write_text("\n".join(lines) + "\n")
    return csv_path, dat_path
