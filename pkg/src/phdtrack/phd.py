"""Particle implementation of the probability hypothesis density (PHD) filter.

The PHD is carried as a weighted particle cloud whose total weight is the
expected number of targets.  One cycle:

* **predict** - survivors are propagated through the motion model with their
  weight scaled by ``1 - p_d``; every report of the previous step spawns
  ``n_per_unit`` birth particles of weight ``p_b / n_per_unit``.
* **update** - each current report contributes one unit of mass spread over
  the prior in proportion to ``prior weight * likelihood``; undetected mass
  survives scaled by ``p_fn``.  There is no clutter term.
* **resample** - ``round(mass * n_per_unit)`` equally weighted particles are
  drawn from the posterior, which keeps the total mass.

The update never materializes one copy of the prior per report.  Since all
copies share the same particle positions, the per-report blocks collapse to
a single weight per particle:
``w_s * (p_fn + sum_i L_i(s) / sum_r w_r L_i(r))``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .models import as_model
from .resampling import resample_indices
from .sensing import log_likelihood_rows
from .streams import RandomLike, as_stream
from .types import STATE_DIM, FilterParams, WeightedCloud

log = logging.getLogger(__name__)

MIN_MASS = 1e-3


@dataclass
class PhdParticleSet:
    cloud: WeightedCloud
    step: int = -1

    @property
    def expected_count(self) -> float:
        return self.cloud.mass

    def __len__(self) -> int:
        return len(self.cloud)

    @classmethod
    def empty(cls, step: int = -1, dim: int = STATE_DIM) -> "PhdParticleSet":
        return cls(WeightedCloud.empty(dim), step)


@dataclass
class FilterOutput:
    step: int
    expected_count: float
    posterior: PhdParticleSet
    peaks: list = field(default_factory=list)
    raw_mass: float = 0.0           # posterior mass before the count cap
    prior_mass: float = 0.0
    skipped_reports: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)


def predict(posterior_prev: PhdParticleSet, reports_prev, params: FilterParams, model,
            rng: RandomLike) -> WeightedCloud:
    """Prior PHD: propagated survivors plus one birth block per previous report."""
    model = as_model(model, params)
    stream = as_stream(rng)
    blocks = []
    prev = posterior_prev.cloud
    if len(prev):
        survivors = WeightedCloud(prev.states, prev.weights * (1.0 - params.p_d))
        blocks.append(model.propagate(survivors, stream.child("survive")))
    p_b = params.p_b
    for i, report in enumerate(reports_prev):
        blocks.append(model.birth(report, params.n_per_unit, p_b, stream.child("birth", i)))
    return WeightedCloud.concat([WeightedCloud.empty(prev.dim)] + blocks)


def update(prior: WeightedCloud, reports_t, params: FilterParams, model=None,
           diagnostics: list | None = None) -> WeightedCloud:
    """Posterior PHD weights on the prior's support.

    A report whose normalizer vanishes (no prior particle explains it at all)
    is left out; its index is appended to ``diagnostics`` when given.
    """
    loglik = model.log_likelihood if model is not None else log_likelihood_rows
    w = prior.weights
    out = params.p_fn * w
    if not len(prior):
        skipped = list(range(len(reports_t)))
    else:
        skipped = []
        with np.errstate(divide="ignore"):
            logw = np.log(w)
        for i, report in enumerate(reports_t):
            a = logw + loglik(report, prior.states)
            top = a.max()
            if not np.isfinite(top):
                skipped.append(i)
                continue
            e = np.exp(a - top)
            out = out + e / e.sum()
    if skipped:
        log.warning("update skipped %d report(s) with no prior support: %s", len(skipped), skipped)
        if diagnostics is not None:
            diagnostics.extend(skipped)
    return WeightedCloud(prior.states, out)


def estimate_count(posterior: WeightedCloud, params: FilterParams) -> float:
    """Expected target count, capped at ``params.max_count``.

    When the cap bites, ``posterior.weights`` are rescaled in place so the
    cloud's mass equals the returned count.
    """
    total = posterior.mass
    if total > params.max_count:
        posterior.weights *= params.max_count / total
        return float(params.max_count)
    return total


def particle_count(mass: float, n_per_unit: int) -> int:
    n = math.floor(mass * n_per_unit + 0.5)
    if n == 0 and mass > MIN_MASS:
        n = 1
    return n


def resample(posterior: WeightedCloud, n_per_unit: int, rng: RandomLike,
             scheme: str = "multinomial", step: int = 0) -> PhdParticleSet:
    """Equal-weight set of ``round(mass * n_per_unit)`` particles with the same mass."""
    if np.any(posterior.weights < 0):
        raise ValueError("negative particle weight")
    mass = posterior.mass
    count = particle_count(mass, n_per_unit) if len(posterior) else 0
    if count == 0:
        return PhdParticleSet.empty(step, posterior.dim)
    gen = as_stream(rng).generator()
    idx = resample_indices(posterior.weights, count, gen, scheme)
    return PhdParticleSet(WeightedCloud(posterior.states[idx], np.full(count, mass / count)), step)


def cold_start(reports_t, params: FilterParams, model, stream) -> WeightedCloud:
    """Posterior when the prior is empty: one unit of mass per report, placed
    where that report alone puts the target (a flat prior)."""
    n = params.n_per_unit
    return WeightedCloud.concat(
        WeightedCloud(model.invert(r, n, stream.child("seed", i)), np.full(n, 1.0 / n))
        for i, r in enumerate(reports_t))


def filter_step(state: PhdParticleSet, reports_prev, reports_t, params: FilterParams, model,
                rng: RandomLike, scheme: str = "multinomial") -> tuple[PhdParticleSet, FilterOutput]:
    """One predict / update / count / resample cycle.

    ``reports_prev`` must be the ``reports_t`` of the previous call; they
    drive this step's births.
    """
    model = as_model(model, params)
    step = state.step + 1
    stream = as_stream(rng).child("step", step)
    skipped: list = []

    t0 = time.perf_counter()
    prior = predict(state, reports_prev, params, model, stream.child("predict"))
    t1 = time.perf_counter()
    if not len(prior) and len(reports_t):
        posterior = cold_start(reports_t, params, model, stream.child("cold"))
    else:
        posterior = update(prior, reports_t, params, model, skipped)
    raw = posterior.mass
    n_hat = estimate_count(posterior, params)
    t2 = time.perf_counter()
    new = resample(posterior, params.n_per_unit, stream.child("resample"), scheme, step)
    t3 = time.perf_counter()

    out = FilterOutput(step, n_hat, new, raw_mass=raw, prior_mass=prior.mass,
                       skipped_reports=skipped,
                       timings={"predict": t1 - t0, "update": t2 - t1, "resample": t3 - t2})
    return new, out


class PhdFilter:
    """Stateful wrapper that remembers the previous step's reports."""

    def __init__(self, params: FilterParams, model, seed: RandomLike = 0,
                 scheme: str = "multinomial"):
        self.params = params
        self.model = as_model(model, params)
        self.stream = as_stream(seed)
        self.scheme = scheme
        self.state = PhdParticleSet.empty(dim=STATE_DIM)
        self.prev_reports: list = []

    def step(self, reports) -> FilterOutput:
        reports = list(reports)
        self.state, out = filter_step(self.state, self.prev_reports, reports, self.params,
                                      self.model, self.stream, self.scheme)
        self.prev_reports = reports
        return out
