import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phdtrack.gmm import (GaussianMixture, choose_k, detect_peaks, extract_peaks, fit,
                          floor_cov, mass_grid)
from phdtrack.terrain import TerrainMap
from phdtrack.types import WeightedCloud

CENTERS = np.array([[0.0, 0.0], [1000.0, 0.0], [0.0, 1000.0]])


def clusters(seed, n=1000, sd=50.0):
    gen = np.random.default_rng(seed)
    pts = np.concatenate([c + sd * gen.standard_normal((n, 2)) for c in CENTERS])
    return WeightedCloud(pts, np.full(len(pts), 3.0 / len(pts)))


def test_single_component_closed_form():
    gen = np.random.default_rng(0)
    pts = gen.normal([10.0, -5.0], [30.0, 8.0], (500, 2))
    w = gen.uniform(0.5, 1.5, 500)
    mix = fit(WeightedCloud(pts, w), 1, rng=0)
    wn = w / w.sum()
    mean = wn @ pts
    cov = (wn[:, None] * (pts - mean)).T @ (pts - mean)
    assert mix.means[0] == pytest.approx(mean, rel=1e-10)
    assert mix.covs[0] == pytest.approx(cov, rel=1e-8)
    assert mix.weights == pytest.approx([1.0])


def test_three_clusters_recovered():
    mix = fit(clusters(0), 3, rng=1)
    got = mix.means[np.argsort(mix.means[:, 0] + 2 * mix.means[:, 1])]
    assert np.max(np.hypot(*(got - CENTERS).T)) < 10.0
    assert mix.weights == pytest.approx([1 / 3] * 3, abs=0.01)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_em_log_likelihood_monotone(seed, k):
    mix = fit(clusters(seed, n=200, sd=120.0), k, rng=seed)
    h = np.array(mix.loglik_history)
    if not mix.reinit_steps:
        assert np.all(np.diff(h) >= -1e-9 * np.abs(h[:-1]))
    assert mix.weights.sum() == pytest.approx(1.0)
    assert np.all(np.linalg.eigvalsh(mix.covs) >= 1.0 - 1e-9)


def test_duplicate_particles_two_components():
    c = WeightedCloud(np.array([[0.0, 0.0]] * 10 + [[5.0, 5.0]] * 10))
    mix = fit(c, 2, rng=0)
    assert mix.weights.sum() == pytest.approx(1.0)
    assert sorted(map(tuple, np.round(mix.means, 6))) == [(0.0, 0.0), (5.0, 5.0)]


def test_too_many_components_rejected():
    with pytest.raises(ValueError):
        fit(WeightedCloud(np.zeros((5, 2))), 2)
    with pytest.raises(ValueError):
        fit(WeightedCloud(np.zeros((5, 2))), 0)


def test_floor_cov():
    out = floor_cov(np.diag([0.01, 4.0]))
    assert np.linalg.eigvalsh(out) == pytest.approx([1.0, 4.0])


def test_extract_peaks_examples():
    eye = np.stack([np.eye(2)] * 3)
    one = GaussianMixture(np.array([1.0]), np.zeros((1, 2)), eye[:1])
    assert [p.mass for p in extract_peaks(one, 1.0)] == [1.0]
    equal = GaussianMixture(np.full(3, 1 / 3), np.zeros((3, 2)), eye)
    assert [p.mass for p in extract_peaks(equal, 3.3)] == pytest.approx([1.1] * 3)
    mix = GaussianMixture(np.array([0.1, 0.6, 0.3]), np.arange(6.0).reshape(3, 2), eye)
    peaks = extract_peaks(mix, 3.0)
    assert [p.mass for p in peaks] == pytest.approx([1.8, 0.9, 0.3])
    assert (peaks[0].x, peaks[0].y) == (2.0, 3.0)


def test_choose_k():
    assert choose_k(3.3) == 3
    assert choose_k(0.0005) == 0
    assert choose_k(0.7) == 1
    assert choose_k(2.5) == 3


def test_detect_peaks_kinematics():
    gen = np.random.default_rng(5)
    n = 400
    a = np.column_stack([gen.normal(0, 20, n), gen.normal(0, 20, n), np.full(n, 8.0),
                         np.full(n, 3.1)])
    b = a.copy()
    b[:, 0] += 2000
    b[:, 3] = -3.1
    cloud = WeightedCloud(np.concatenate([a, b]), np.full(2 * n, 2.0 / (2 * n)))
    peaks, mix = detect_peaks(cloud, 0)
    assert len(peaks) == 2 and mix.k == 2
    for p in peaks:
        assert p.speed == pytest.approx(8.0)
        assert abs(abs(p.heading) - 3.1) < 1e-9
    assert detect_peaks(WeightedCloud(np.zeros((3, 4)), np.full(3, 1e-4)), 0) == ([], None)


def test_mass_grid_bins():
    tmap = TerrainMap(np.zeros((2, 2)), 10.0)
    cloud = WeightedCloud(np.array([[1.0, 1.0], [2.0, 2.0], [15.0, 1.0], [50.0, 50.0]]),
                          [0.1, 0.2, 0.3, 0.4])
    rows, cols, mass = mass_grid(cloud, tmap)
    got = {(int(r), int(c)): m for r, c, m in zip(rows, cols, mass)}
    assert got == pytest.approx({(0, 0): 0.3, (0, 1): 0.3})
