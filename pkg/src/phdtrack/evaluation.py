"""Tracking metrics: cardinality error and nearest-peak position error.

The position error of a vehicle is the distance to the closest detected
peak, with no one-to-one assignment, so one peak may serve several
vehicles.  Track loss (error above 300 m for at least three consecutive
steps) is a diagnostic defined here, not a standard metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

LOSS_DISTANCE = 300.0
LOSS_STEPS = 3


@dataclass
class StepMetrics:
    step: int
    n_true: int
    n_hat: float
    errors: dict = field(default_factory=dict)   # vehicle id -> meters, None if no peak
    ospa: float | None = None


def position_errors(truth_step, peaks) -> dict:
    """Map vehicle id to the distance of its nearest peak (None without peaks)."""
    if not len(peaks):
        return {vid: None for vid, _ in truth_step}
    pk = np.array([(p[0], p[1]) for p in peaks], dtype=float)
    out = {}
    for vid, s in truth_step:
        out[vid] = float(np.hypot(pk[:, 0] - s.x, pk[:, 1] - s.y).min())
    return out


def ospa(truth_step, peaks, cutoff: float = 500.0, order: int = 1) -> float:
    """Optimal sub-pattern assignment distance between truth and peak positions."""
    n, m = len(truth_step), len(peaks)
    if n == 0 and m == 0:
        return 0.0
    if n == 0 or m == 0:
        return float(cutoff)
    t = np.array([(s.x, s.y) for _, s in truth_step])
    p = np.array([(q[0], q[1]) for q in peaks], dtype=float)
    d = np.minimum(np.hypot(t[:, None, 0] - p[None, :, 0], t[:, None, 1] - p[None, :, 1]), cutoff)
    d = d ** order
    r, c = linear_sum_assignment(d)
    cost = d[r, c].sum() + cutoff ** order * abs(n - m)
    return float((cost / max(n, m)) ** (1.0 / order))


def step_metrics(step, truth_step, n_hat, peaks, with_ospa=False) -> StepMetrics:
    return StepMetrics(step, len(truth_step), float(n_hat), position_errors(truth_step, peaks),
                       ospa(truth_step, peaks) if with_ospa else None)


def track_losses(series) -> int:
    """Episodes of at least ``LOSS_STEPS`` consecutive steps beyond ``LOSS_DISTANCE``.

    ``series`` holds one entry per step the vehicle is alive; a missing
    error (no peaks at all) counts as lost.
    """
    episodes, run = 0, 0
    for e in list(series) + [0.0]:
        if e is None or e > LOSS_DISTANCE:
            run += 1
        else:
            if run >= LOSS_STEPS:
                episodes += 1
            run = 0
    return episodes


def summarize(metrics) -> dict:
    metrics = list(metrics)
    if not metrics:
        raise ValueError("no steps to summarize")
    per_vehicle: dict = {}
    for m in metrics:
        for vid, e in m.errors.items():
            per_vehicle.setdefault(vid, []).append(e)
    pooled = [e for errs in per_vehicle.values() for e in errs if e is not None]

    card_ok = [abs(math.floor(m.n_hat + 0.5) - m.n_true) <= 1 for m in metrics]
    out = {
        "steps": len(metrics),
        "median_error": float(np.median(pooled)) if pooled else math.nan,
        "p90_error": float(np.percentile(pooled, 90)) if pooled else math.nan,
        "cardinality_fraction": float(np.mean(card_ok)),
        "mean_abs_count_error": float(np.mean([abs(m.n_hat - m.n_true) for m in metrics])),
        "track_losses": sum(track_losses(errs) for errs in per_vehicle.values()),
        "max_n_hat": float(max(m.n_hat for m in metrics)),
    }
    for vid in sorted(per_vehicle):
        errs = [e for e in per_vehicle[vid] if e is not None]
        out[f"median_error_v{vid}"] = float(np.median(errs)) if errs else math.nan
    ospas = [m.ospa for m in metrics if m.ospa is not None]
    if ospas:
        out["mean_ospa"] = float(np.mean(ospas))
    return out


def format_summary(summary: dict) -> str:
    lines = []
    for k, v in summary.items():
        lines.append(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}")
    return "\n".join(lines) + "\n"
