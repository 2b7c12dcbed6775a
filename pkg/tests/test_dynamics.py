import math

import numpy as np
import pytest
from conftest import uniform_map
from hypothesis import given, settings
from hypothesis import strategies as st

from phdtrack.dynamics import advance, apply_terrain, displacement, map_chunks, propagate_cloud
from phdtrack.streams import KeyedStream
from phdtrack.terrain import TerrainClass, TerrainMap
from phdtrack.types import SIGMA_W, NoiseSpec, TargetState, WeightedCloud

TINY = NoiseSpec(1e-12, 1e-12, 1e-12, 1e-12)


def test_displacement_examples():
    assert displacement(TargetState(0, 0, 0.0, 1.3), 5.0) == (0.0, 0.0)
    dx, dy = displacement(TargetState(0, 0, 8.3, 0.0), 5.0)
    assert dx == pytest.approx(41.5) and dy == 0.0
    dx, dy = displacement(TargetState(0, 0, 2.0, math.pi / 2), 1.0)
    assert dx == pytest.approx(0.0, abs=1e-12) and dy == pytest.approx(2.0)
    with pytest.raises(ValueError):
        displacement(TargetState(0, 0, 1, 0), 0.0)


def test_uniform_road_deterministic_limit():
    tmap = uniform_map(TerrainClass.ROAD, 100, 100, 100.0)
    states = np.array([[5000.0, 5000.0, 8.3, 0.0], [2000.0, 3000.0, 2.0, math.pi / 2]])
    cloud = WeightedCloud(states, [0.7, 0.4])
    out = propagate_cloud(cloud, 5.0, TINY, tmap, KeyedStream(0), mode="reweight")
    assert out.mass == pytest.approx(1.1, rel=1e-12)
    assert out.states[0, :2] == pytest.approx([5041.5, 5000.0])
    assert out.states[1, :2] == pytest.approx([2000.0, 3010.0])


def test_reweight_ratio_road_forest():
    tmap = TerrainMap(np.array([[TerrainClass.ROAD, TerrainClass.FOREST]]), 1000.0)
    cloud = WeightedCloud(np.array([[500.0, 500.0, 0.0, 0.0], [1500.0, 500.0, 0.0, 0.0]]), [0.5, 0.5])
    out = propagate_cloud(cloud, 5.0, TINY, tmap, KeyedStream(0), mode="reweight")
    assert out.weights[0] / out.weights[1] == pytest.approx(66.0)
    assert out.mass == pytest.approx(1.0)


def test_resample_mode_road_fraction():
    # road on the west half, field on the east half; particles sit on the border
    tmap = TerrainMap(np.array([[TerrainClass.ROAD, TerrainClass.FIELD]]), 1000.0)
    n = 100_000
    gen = np.random.default_rng(0)
    states = np.column_stack([1000.0 + gen.uniform(-400, 400, n), np.full(n, 500.0),
                              np.zeros(n), np.zeros(n)])
    cloud = WeightedCloud(states, np.full(n, 2.0 / n))
    sigma = NoiseSpec(1e-9, 1e-9, 1e-9, 1e-9)
    out = propagate_cloud(cloud, 5.0, sigma, tmap, KeyedStream(1), mode="resample")
    assert len(out) == n and out.mass == pytest.approx(2.0)
    assert np.allclose(out.weights, 2.0 / n)
    road = np.mean(out.states[:, 0] < 1000.0)
    base = np.mean(states[:, 0] < 1000.0)
    expect = 0.66 * base / (0.66 * base + 0.33 * (1 - base))
    se = math.sqrt(expect * (1 - expect) / n)
    assert abs(road - expect) < 3 * se
    assert expect == pytest.approx(0.66 / 0.99, abs=0.01)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 300), st.sampled_from(["resample", "reweight"]), st.integers(0, 1000))
def test_propagation_preserves_mass(n, mode, seed):
    tmap = TerrainMap(np.random.default_rng(seed).integers(0, 3, (8, 8)), 50.0)
    gen = np.random.default_rng(seed)
    states = np.column_stack([gen.uniform(0, 400, n), gen.uniform(0, 400, n),
                              gen.uniform(0, 10, n), gen.uniform(-3, 3, n)])
    cloud = WeightedCloud(states, gen.uniform(0.1, 1.0, n))
    out = propagate_cloud(cloud, 5.0, SIGMA_W, tmap, KeyedStream(seed), mode=mode)
    assert out.mass == pytest.approx(cloud.mass, rel=1e-12)
    assert np.all(out.states[:, 2] >= 0)
    assert np.all(out.states[:, 3] >= -math.pi) and np.all(out.states[:, 3] < math.pi)


def test_advance_uses_pre_noise_kinematics():
    states = np.array([[0.0, 0.0, 10.0, 0.0]])
    noise = np.array([[0.0, 0.0, 1.0, 1.0]])
    out = advance(states, 1.0, np.array([1.0, 1.0, 1.0, math.pi / 2]), noise)
    assert out[0, 0] == pytest.approx(10.0) and out[0, 1] == pytest.approx(0.0)
    assert out[0, 2] == 11.0 and out[0, 3] == pytest.approx(math.pi / 2)


def test_workers_bit_identical():
    tmap = TerrainMap(np.random.default_rng(4).integers(0, 3, (40, 40)), 25.0)
    gen = np.random.default_rng(9)
    n = 10_000
    states = np.column_stack([gen.uniform(0, 1000, n), gen.uniform(0, 1000, n),
                              gen.uniform(0, 10, n), gen.uniform(-3, 3, n)])
    cloud = WeightedCloud(states, np.full(n, 1e-3))
    for mode in ("resample", "reweight"):
        a = propagate_cloud(cloud, 5.0, SIGMA_W, tmap, KeyedStream(2), mode, workers=1)
        b = propagate_cloud(cloud, 5.0, SIGMA_W, tmap, KeyedStream(2), mode, workers=4)
        assert np.array_equal(a.states, b.states) and np.array_equal(a.weights, b.weights)


def test_map_chunks_order():
    parts = map_chunks(lambda a, b: np.arange(a, b), 10_000, workers=3)
    assert len(parts) == 3
    assert np.array_equal(np.concatenate(parts), np.arange(10_000))


def test_propagate_rejects_bad_input():
    tmap = uniform_map(TerrainClass.ROAD)
    with pytest.raises(ValueError):
        propagate_cloud(WeightedCloud.empty(), 5.0, SIGMA_W, tmap, 0)
    cloud = WeightedCloud(np.zeros((2, 4)))
    with pytest.raises(ValueError):
        propagate_cloud(cloud, 5.0, SIGMA_W, tmap, 0, mode="bogus")


def test_apply_terrain_keeps_mass():
    tmap = TerrainMap(np.array([[0, 2]]), 10.0)
    cloud = WeightedCloud(np.array([[5.0, 5.0, 0, 0], [15.0, 5.0, 0, 0]]), [0.2, 0.3])
    out = apply_terrain(cloud, tmap, KeyedStream(0), "reweight")
    assert out.mass == pytest.approx(0.5)
    assert out.weights[0] / out.weights[1] == pytest.approx(0.66 * 0.2 / (0.01 * 0.3))
