import math

import numpy as np
import pytest
from scipy import integrate

from phdtrack.sensing import (birth_rows, invert_rows, likelihood, log_likelihood_rows,
                              sample_report)
from phdtrack.streams import KeyedStream
from phdtrack.types import SIGMA_R, SIGMA_W, NoiseSpec, Report, TargetState

PEAK = 1.0 / math.prod(math.sqrt(2 * math.pi) * s for s in SIGMA_R.as_tuple())
TINY = NoiseSpec(1e-12, 1e-12, 1e-12, 1e-12)


def report_at(x=0.0, y=0.0, speed=8.3, heading=0.0, noise=SIGMA_R, step=0):
    return Report(step, TargetState(x, y, speed, heading), noise)


def test_density_at_zero_residual():
    r = report_at()
    assert likelihood(r, r.observed) == pytest.approx(PEAK, rel=1e-12)


def test_one_sigma_position_residual():
    r = report_at()
    assert likelihood(r, TargetState(50.0, 0.0, 8.3, 0.0)) == pytest.approx(PEAK * math.exp(-0.5), rel=1e-12)


def test_heading_wrap_symmetry():
    eps = 1e-3
    r = report_at(heading=-math.pi)
    a = likelihood(r, TargetState(0, 0, 8.3, math.pi - eps))
    b = likelihood(r, TargetState(0, 0, 8.3, -math.pi + eps))
    assert a == pytest.approx(b, rel=1e-9)


def test_likelihood_integrates_to_one_over_heading():
    # marginal over heading of the state argument, other components at the report value
    r = report_at(heading=3.0)
    sig = SIGMA_R.as_tuple()
    rest = 1.0 / math.prod(math.sqrt(2 * math.pi) * s for s in sig[:3])
    total, _ = integrate.quad(lambda h: likelihood(r, TargetState(0, 0, 8.3, h)), -math.pi, math.pi,
                              points=[3.0 - 2 * math.pi], limit=200)
    assert total / rest == pytest.approx(1.0, abs=1e-6)


def test_log_likelihood_vectorized():
    r = report_at(x=10.0)
    states = np.array([[10.0, 0.0, 8.3, 0.0], [60.0, 0.0, 8.3, 0.0]])
    ll = log_likelihood_rows(r, states)
    assert ll[0] - ll[1] == pytest.approx(0.5)


def test_sample_report_noise_limit():
    s = TargetState(3.0, 4.0, 5.0, 1.0)
    r = sample_report(s, TINY, 7, 0)
    assert r.step == 7
    assert r.observed.as_array() == pytest.approx(s.as_array())


def test_sample_report_spread():
    s = TargetState(0.0, 0.0, 8.3, 0.0)
    gen = np.random.default_rng(0)
    rows = np.array([sample_report(s, SIGMA_R, 0, gen).observed.as_array() for _ in range(20_000)])
    sd = rows[:, :2].std(axis=0)
    assert sd == pytest.approx([50.0, 50.0], rel=0.02)
    assert rows[:, 3].std() == pytest.approx(math.pi / 8, rel=0.02)


def test_sample_report_heading_near_pi():
    s = TargetState(0.0, 0.0, 8.3, math.pi - 0.05)
    gen = np.random.default_rng(1)
    h = np.array([sample_report(s, SIGMA_R, 0, gen).observed.heading for _ in range(20_000)])
    resid = np.angle(np.exp(1j * (h - s.heading)))
    assert abs(resid.mean()) < 3 * (math.pi / 8) / math.sqrt(len(h))


def test_invert_rows_distribution():
    r = report_at(x=100.0, y=-40.0, speed=20.0)
    rows = invert_rows(r, 100_000, KeyedStream(3))
    assert rows.mean(axis=0)[:3] == pytest.approx([100.0, -40.0, 20.0], abs=1.0)
    assert rows.std(axis=0) == pytest.approx(SIGMA_R.as_array(), rel=0.02)


def test_invert_noise_limit_returns_observed():
    r = report_at(x=1.0, y=2.0, speed=3.0, heading=-1.0, noise=TINY)
    assert invert_rows(r, 3, KeyedStream(0)) == pytest.approx(np.tile(r.observed.as_array(), (3, 1)))


def test_invert_clamps_speed():
    rows = invert_rows(report_at(speed=0.05, noise=NoiseSpec(1, 1, 1, 0.1)), 10_000, KeyedStream(0))
    assert np.all(rows[:, 2] >= 0.0)


def test_birth_noise_limit():
    r = report_at(x=100.0, speed=8.3, heading=0.0, noise=TINY)
    rows = birth_rows(r, 2, 5.0, TINY, KeyedStream(0))
    assert rows[:, :2] == pytest.approx(np.array([[141.5, 0.0], [141.5, 0.0]]), abs=1e-6)


def test_birth_cloud_mean_and_spread():
    r = report_at(x=1000.0, y=500.0)
    n = 1000
    rows = birth_rows(r, n, 5.0, SIGMA_W, KeyedStream(5))
    # the displacement uses the inverted (noisy) speed and heading, so the mean
    # is E[s cos h] * dt rather than exactly 41.5; the closed form for Gaussian h:
    dx = 5.0 * 8.3 * math.exp(-0.5 * (math.pi / 8) ** 2)
    se = rows[:, :2].std(axis=0) / math.sqrt(n)
    assert abs(rows[:, 0].mean() - (1000.0 + dx)) < 3 * se[0]
    assert abs(rows[:, 1].mean() - 500.0) < 3 * se[1]
    wide = np.sqrt(SIGMA_R.as_array() ** 2 + SIGMA_W.as_array() ** 2)
    sd = rows.std(axis=0)
    assert np.all(sd[:3] > SIGMA_R.as_array()[:3]) and np.all(sd[:3] > SIGMA_W.as_array()[:3])
    assert sd[2] == pytest.approx(wide[2], rel=0.1)
