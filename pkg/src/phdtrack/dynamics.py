"""Terrain-modulated vehicle motion.

A state moves by its own speed and heading over one time step, picks up
Gaussian noise on every component, and is then weighted by how likely a
vehicle is to be found in the terrain it landed in.  The terrain factor is
applied per cloud: either by reweighting (mass preserved by one common
scale factor) or by resampling the cloud in proportion to terrain weight.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .resampling import multinomial_indices
from .streams import RandomLike, as_stream
from .terrain import TerrainMap
from .types import HEADING, SPEED, X, Y, NoiseSpec, TargetState, WeightedCloud, canonicalize

MODES = ("resample", "reweight")

# Chunks smaller than this are not worth a thread hop.
_MIN_CHUNK = 2048


def displacement(state: TargetState, dt: float) -> tuple[float, float]:
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    d = state.speed * dt
    return d * math.cos(state.heading), d * math.sin(state.heading)


def advance(states: np.ndarray, dt: float, sigma: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """Move rows by speed * dt along heading, then add ``sigma * noise``."""
    out = states + sigma * noise
    d = states[:, SPEED] * dt
    out[:, X] += d * np.cos(states[:, HEADING])
    out[:, Y] += d * np.sin(states[:, HEADING])
    return canonicalize(out)


def map_chunks(fn, n: int, workers: int = 1) -> list:
    """Call ``fn(start, stop)`` over contiguous ranges covering ``range(n)``.

    Results are returned in range order, so concatenating them gives the same
    array for any ``workers``.
    """
    if workers <= 1 or n < 2 * _MIN_CHUNK:
        return [fn(0, n)]
    k = min(workers, max(1, n // _MIN_CHUNK))
    bounds = np.linspace(0, n, k + 1).astype(int)
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, bounds[:-1], bounds[1:]))


def propagate_cloud(cloud: WeightedCloud, dt: float, sigma_w: NoiseSpec, tmap: TerrainMap,
                    rng: RandomLike, mode: str = "resample", workers: int = 1) -> WeightedCloud:
    if not len(cloud):
        raise ValueError("cannot propagate an empty cloud")
    if mode not in MODES:
        raise ValueError(f"unknown terrain mode {mode!r}; expected one of {MODES}")
    stream = as_stream(rng)
    motion = stream.child("motion")
    sigma = sigma_w.as_array()

    def work(a, b):
        moved = advance(cloud.states[a:b], dt, sigma, motion.normal_rows(a, b))
        return moved, tmap.weights(moved[:, X], moved[:, Y])

    parts = map_chunks(work, len(cloud), workers)
    states = np.concatenate([p[0] for p in parts])
    p_t = np.concatenate([p[1] for p in parts])

    return terrain_factor(WeightedCloud(states, cloud.weights), p_t, stream, mode)


def terrain_factor(cloud: WeightedCloud, p_t: np.ndarray, rng: RandomLike,
                   mode: str = "resample") -> WeightedCloud:
    """Fold per-particle terrain probabilities ``p_t`` into a cloud, keeping its mass."""
    mass = cloud.mass
    w = cloud.weights * p_t
    total = w.sum()
    if not total > 0:
        raise ValueError("terrain weighting left no particle with positive weight")
    if mode == "reweight":
        return WeightedCloud(cloud.states, w * (mass / total))
    n = len(cloud)
    idx = multinomial_indices(w, n, as_stream(rng).child("terrain").generator())
    return WeightedCloud(cloud.states[idx], np.full(n, mass / n))


def apply_terrain(cloud: WeightedCloud, tmap: TerrainMap, rng: RandomLike,
                  mode: str = "resample") -> WeightedCloud:
    return terrain_factor(cloud, tmap.weights(cloud.states[:, X], cloud.states[:, Y]), rng, mode)
