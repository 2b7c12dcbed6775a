"""End-to-end runs: PHD or bootstrap filtering over a report sequence,
peak extraction, and scoring against ground truth."""

from __future__ import annotations

import time

import numpy as np

from . import gmm
from .bootstrap import resample_equal, weigh, weighted_mean
from .evaluation import step_metrics
from .phd import FilterOutput, PhdFilter, PhdParticleSet
from .streams import KeyedStream
from .types import FilterParams, WeightedCloud


def run_phd(reports_by_step, params: FilterParams, model, seed: int = 0,
            scheme: str = "multinomial", dumper=None, **fit_kw) -> list[FilterOutput]:
    root = KeyedStream(seed)
    filt = PhdFilter(params, model, root.child("filter"), scheme)
    outputs = []
    for step, reports in enumerate(reports_by_step):
        out = filt.step(reports)
        t0 = time.perf_counter()
        out.peaks, mix = gmm.detect_peaks(out.posterior.cloud, root.child("gmm", step), **fit_kw)
        out.timings["gmm"] = time.perf_counter() - t0
        if dumper is not None:
            dumper.dump(out, mix)
        outputs.append(out)
    return outputs


def run_bootstrap(reports_by_step, params: FilterParams, model, seed: int = 0,
                  scheme: str = "multinomial", dumper=None) -> list[FilterOutput]:
    """Single-target tracking: initialized from the first report, one peak per
    step at the weighted mean position."""
    root = KeyedStream(seed).child("bootstrap")
    n = params.n_per_unit
    cloud = None
    outputs = []
    for step, reports in enumerate(reports_by_step):
        if len(reports) > 1:
            raise ValueError(f"step {step}: bootstrap filter takes at most one report, got {len(reports)}")
        report = reports[0] if reports else None
        stream = root.child("step", step)
        t0 = time.perf_counter()
        if cloud is None:
            if report is None:
                outputs.append(FilterOutput(step, 0.0, PhdParticleSet.empty(step)))
                continue
            cloud = WeightedCloud(model.invert(report, n, stream.child("init")))
            post = cloud
        else:
            post = weigh(cloud, report, model, stream)
            cloud = resample_equal(post, n, stream.child("resample"), scheme)
        mean = weighted_mean(post)
        out = FilterOutput(step, 1.0, PhdParticleSet(cloud, step), raw_mass=1.0,
                           timings={"step": time.perf_counter() - t0})
        out.peaks = [gmm.Peak(float(mean[0]), float(mean[1]), 1.0)]
        if dumper is not None:
            dumper.dump(out, None)
        outputs.append(out)
    return outputs


def score(truth_states, outputs, with_ospa: bool = False) -> list:
    by_step = {o.step: o for o in outputs}
    metrics = []
    for step, alive in enumerate(truth_states):
        o = by_step.get(step)
        n_hat, peaks = (o.expected_count, o.peaks) if o is not None else (0.0, [])
        metrics.append(step_metrics(step, alive, n_hat, peaks, with_ospa))
    return metrics


def mean_timings(outputs) -> dict:
    keys = sorted({k for o in outputs for k in o.timings})
    return {k: float(np.mean([o.timings.get(k, 0.0) for o in outputs])) for k in keys}
