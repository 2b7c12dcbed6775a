"""Single-target bootstrap particle filter.

Propagate through the motion model, weight by the likelihood of the single
report, normalize, resample back to the same number of particles.  It runs
on the same models as the PHD filter and serves as their reference check.
"""

from __future__ import annotations

import numpy as np

from .resampling import resample_indices
from .streams import RandomLike, as_stream
from .types import WeightedCloud


class DegenerateWeights(RuntimeError):
    pass


def weigh(cloud: WeightedCloud, report, model, rng: RandomLike) -> WeightedCloud:
    """Propagated and likelihood-weighted cloud, weights summing to one."""
    stream = as_stream(rng)
    unit = WeightedCloud(cloud.states, cloud.weights / cloud.mass)
    prior = model.propagate(unit, stream.child("propagate"))
    if report is None:
        return prior
    with np.errstate(divide="ignore"):
        a = np.log(prior.weights) + model.log_likelihood(report, prior.states)
    top = a.max()
    if not np.isfinite(top):
        raise DegenerateWeights(
            f"all {len(prior)} particles have zero likelihood for report {report!r}")
    w = np.exp(a - top)
    return WeightedCloud(prior.states, w / w.sum())


def bootstrap_step(cloud: WeightedCloud, report, model, rng: RandomLike,
                   scheme: str = "multinomial") -> WeightedCloud:
    """One full cycle; ``report=None`` skips the measurement update."""
    stream = as_stream(rng)
    weighted = weigh(cloud, report, model, stream)
    return resample_equal(weighted, len(cloud), stream.child("resample"), scheme)


def resample_equal(weighted: WeightedCloud, n: int, rng: RandomLike,
                   scheme: str = "multinomial") -> WeightedCloud:
    idx = resample_indices(weighted.weights, n, as_stream(rng).generator(), scheme)
    return WeightedCloud(weighted.states[idx], np.full(n, 1.0 / n))


def weighted_mean(cloud: WeightedCloud) -> np.ndarray:
    return cloud.weights @ cloud.states / cloud.mass
