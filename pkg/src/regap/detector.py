"""Static and dynamic reconstruction error, Multi-Edit aggregation, thresholds."""

from __future__ import annotations

import csv
import enum
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from regap.edits import EditConfig, EditKind, apply_edit
from regap.metrics import MetricConfig, MetricKind, distance
from regap.model import AutoencoderPair, LatentPrior

logger = logging.getLogger(__name__)


class Verdict(str, enum.Enum):
    REAL = "Real"
    GENERATED = "Generated"
    UNCLASSIFIED = "Unclassified"


class AggregationRule(str, enum.Enum):
    MAX = "Max"
    MEAN = "Mean"
    MIN = "Min"


def reconstruct(model: AutoencoderPair, x) -> np.ndarray:
    return model.reconstruct(x)


def static_error(model: AutoencoderPair, metric, cfg: MetricConfig, x) -> float:
    """``e_pre = d(x, f(x))``."""
    return distance(metric, cfg, x, model.reconstruct(x))


def dynamic_error(model, metric, edit_kind, edit_cfg: EditConfig, x, rng,
                  metric_cfg: MetricConfig | None = None, prior: LatentPrior | None = None):
    """Return ``(e_pre, e_post, delta)`` for one edit; ``delta`` is signed."""
    metric_cfg = metric_cfg or MetricConfig()
    e_pre = static_error(model, metric, metric_cfg, x)
    edited = apply_edit(edit_kind, model, x, edit_cfg, rng, prior)
    e_post = static_error(model, metric, metric_cfg, edited)
    return e_pre, e_post, e_post - e_pre


def aggregate(deltas: Sequence[float], rule: AggregationRule | str) -> float:
    if len(deltas) == 0:
        raise ValueError("cannot aggregate an empty list of deltas")
    rule = AggregationRule(rule)
    if rule is AggregationRule.MAX:
        return float(max(deltas))
    if rule is AggregationRule.MIN:
        return float(min(deltas))
    return float(np.mean(deltas))


@dataclass(frozen=True)
class Calibration:
    tau: float
    retention: float
    n_calibration: int
    method: str = "nearest-rank"

    def real_retention(self, real_scores: Sequence[float]) -> float:
        s = np.asarray(real_scores, dtype=np.float64)
        return float(np.mean(s <= self.tau))


def calibrate_threshold(real_deltas: Sequence[float], retention: float = 0.95) -> Calibration:
    """Nearest-rank threshold: the ``ceil(retention * n)``-th smallest score."""
    if len(real_deltas) == 0:
        raise ValueError("calibration needs at least one real score")
    if not 0.0 < retention < 1.0:
        raise ValueError("retention must lie in (0, 1)")
    s = np.sort(np.asarray(real_deltas, dtype=np.float64))
    n = s.size
    rank = max(1, math.ceil(retention * n - 1e-12))
    return Calibration(tau=float(s[rank - 1]), retention=retention, n_calibration=n)


def classify(delta_star: float, tau: float) -> Verdict:
    return Verdict.GENERATED if delta_star > tau else Verdict.REAL


@dataclass
class EditOutcome:
    kind: EditKind
    e_post: float
    delta: float


@dataclass
class DetectionRecord:
    id: str
    e_pre: float
    per_edit: list[EditOutcome]
    delta_star: float
    verdict: Verdict = Verdict.UNCLASSIFIED
    tau: float | None = None
    truth: str | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def image_rng(master_seed: int, index: int, stream: int = 0) -> np.random.Generator:
    """Per-image generator derived only from ``(master_seed, index, stream)``."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(index), int(stream)]))


def edited_images(model, edit_set, x, master_seed: int, index: int, prior: LatentPrior | None = None):
    """Apply every edit of the set to the original ``x`` independently."""
    out = []
    for pos, (kind, cfg) in enumerate(edit_set):
        rng = image_rng(master_seed, index, pos)
        out.append(apply_edit(kind, model, x, cfg, rng, prior))
    return out


def worker_count() -> int:
    raw = os.environ.get("REGAP_THREADS", "").strip()
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Order-preserving map over ``items`` capped by ``REGAP_THREADS``."""
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass
class ImageErrors:
    """Metric-independent edit results cached per image."""

    x: np.ndarray
    recon: np.ndarray
    edited: list[np.ndarray]
    edited_recon: list[np.ndarray]


def compute_image_errors(model, edit_set, x, master_seed, index, prior=None) -> ImageErrors:
    x = np.asarray(x, dtype=np.float64)
    edited = edited_images(model, edit_set, x, master_seed, index, prior)
    return ImageErrors(x, model.reconstruct(x), edited, [model.reconstruct(e) for e in edited])


def record_from_errors(cache: ImageErrors, edit_set, metric, metric_cfg, rule, ident, tau=None, truth=None):
    e_pre = distance(metric, metric_cfg, cache.x, cache.recon)
    outcomes = []
    for (kind, _), xe, re in zip(edit_set, cache.edited, cache.edited_recon):
        e_post = distance(metric, metric_cfg, xe, re)
        outcomes.append(EditOutcome(EditKind(kind), e_post, e_post - e_pre))
    ds = aggregate([o.delta for o in outcomes], rule)
    verdict = Verdict.UNCLASSIFIED if tau is None else classify(ds, tau)
    return DetectionRecord(str(ident), e_pre, outcomes, ds, verdict, tau, truth)


def detect_batch(
    model: AutoencoderPair,
    metric: MetricKind | str,
    edit_set,
    aggregation: AggregationRule | str,
    calibration: Calibration | float | None,
    images,
    master_seed: int,
    metric_cfg: MetricConfig | None = None,
    prior: LatentPrior | None = None,
    ids: Sequence[str] | None = None,
    truths: Sequence[str | None] | None = None,
) -> list[DetectionRecord]:
    """Run the full pipeline on each image; failures are isolated per record.

    ``calibration`` may be a :class:`Calibration`, a fixed ``tau`` or ``None``
    (records stay ``Unclassified``).
    """
    edit_set = list(edit_set)
    if not edit_set:
        raise ValueError("edit set must not be empty")
    metric_cfg = metric_cfg or MetricConfig()
    tau = calibration.tau if isinstance(calibration, Calibration) else calibration
    images = list(images)
    ids = list(ids) if ids is not None else [str(i) for i in range(len(images))]
    truths = list(truths) if truths is not None else [None] * len(images)

    def one(i):
        try:
            cache = compute_image_errors(model, edit_set, images[i], master_seed, i, prior)
            return record_from_errors(cache, edit_set, metric, metric_cfg, aggregation, ids[i], tau, truths[i])
        except Exception as exc:  # isolate per-image failures
            logger.warning("detection failed for %s: %s", ids[i], exc)
            return DetectionRecord(ids[i], math.nan, [], math.nan, Verdict.UNCLASSIFIED, tau, truths[i], str(exc))

    return parallel_map(one, range(len(images)))


RECORD_COLUMNS = ["id", "label", "e_pre", "e_post_add", "e_post_fix", "e_post_sem",
                  "d_add", "d_fix", "d_sem", "delta_star", "tau", "verdict"]


def _f6(v) -> str:
    if v is None:
        return ""
    v = float(v)
    return "nan" if math.isnan(v) else f"{v:.6f}"


def record_row(rec: DetectionRecord) -> list[str]:
    """CSV row; per-kind columns hold the first edit of that kind in the set."""
    first = {}
    for o in rec.per_edit:
        first.setdefault(o.kind, o)
    row = [rec.id, rec.truth or "", _f6(rec.e_pre)]
    for attr in ("e_post", "delta"):
        for kind in (EditKind.ADD, EditKind.FIX, EditKind.SEM):
            o = first.get(kind)
            row.append(_f6(getattr(o, attr)) if o else "")
    row += [_f6(rec.delta_star), _f6(rec.tau), "Error" if rec.failed else rec.verdict.value]
    return row


def write_records_csv(records: Sequence[DetectionRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for rec in records:
            w.writerow(record_row(rec))
