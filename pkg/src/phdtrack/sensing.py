"""Additive Gaussian observation model ``report = state + noise``.

Because observations live in the state space, the observation function can
be inverted: a state consistent with a report is ``observed - v`` with ``v``
drawn from the report's own noise.  That inversion seeds target births.
"""

from __future__ import annotations

import math

import numpy as np

from .dynamics import advance
from .streams import RandomLike, as_generator, as_stream
from .types import HEADING, NoiseSpec, Report, TargetState, canonicalize, wrap_angles

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def log_likelihood_rows(report: Report, states: np.ndarray) -> np.ndarray:
    """Log density of ``report`` given each state row.

    The heading residual is wrapped before the Gaussian is evaluated, so
    headings just either side of +-pi are treated as neighbors.
    """
    sigma = report.noise.as_array()
    resid = report.observed.as_array() - states
    resid[:, HEADING] = wrap_angles(resid[:, HEADING])
    z = resid / sigma
    return -0.5 * np.einsum("ij,ij->i", z, z) - (np.log(sigma).sum() + 4 * _LOG_SQRT_2PI)


def likelihood(report: Report, state: TargetState) -> float:
    return float(np.exp(log_likelihood_rows(report, state.as_array()[None, :])[0]))


def sample_report(true_state: TargetState, noise: NoiseSpec, step: int, rng: RandomLike) -> Report:
    gen = as_generator(rng)
    row = true_state.as_array() + noise.as_array() * gen.standard_normal(4)
    observed = canonicalize(row[None, :])[0]
    return Report(step, TargetState.from_array(observed), noise)


def invert_rows(report: Report, n: int, rng: RandomLike) -> np.ndarray:
    """``n`` draws of ``observed - v`` with ``v`` from the report noise."""
    stream = as_stream(rng).child("invert")
    noise = stream.normal_rows(0, n)
    rows = report.observed.as_array() - report.noise.as_array() * noise
    return canonicalize(rows)


def invert_observation(report: Report, rng: RandomLike) -> TargetState:
    return TargetState.from_array(invert_rows(report, 1, rng)[0])


def birth_rows(report: Report, n: int, dt: float, sigma_w: NoiseSpec, rng: RandomLike) -> np.ndarray:
    """Draws from the birth density: invert the report, then one motion step.

    The terrain factor is left to the caller, which applies it to the whole
    birth cloud.
    """
    stream = as_stream(rng)
    start = invert_rows(report, n, stream)
    return advance(start, dt, sigma_w.as_array(), stream.child("birth-motion").normal_rows(0, n))


def birth_sample(report: Report, dt: float, sigma_w: NoiseSpec, rng: RandomLike) -> TargetState:
    return TargetState.from_array(birth_rows(report, 1, dt, sigma_w, rng)[0])
