"""Weighted EM fit of a 2-D Gaussian mixture to a particle cloud.

Component means of the fitted mixture are read as the maxima of the PHD,
i.e. the estimated target positions.  Only particle positions enter the
fit; speed and heading of each peak are averaged over the particles that
the final E-step assigns to that component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .resampling import multinomial_indices
from .streams import RandomLike, as_generator
from .types import HEADING, SPEED, WeightedCloud, wrap_angles

COV_FLOOR = 1.0  # m^2, per eigenvalue
DEGENERATE_WEIGHT = 1e-6
_LOG_2PI = math.log(2.0 * math.pi)


class Peak(NamedTuple):
    x: float
    y: float
    mass: float
    speed: float = math.nan
    heading: float = math.nan


@dataclass
class GaussianMixture:
    weights: np.ndarray          # (k,)
    means: np.ndarray            # (k, 2)
    covs: np.ndarray             # (k, 2, 2)
    loglik_history: list = field(default_factory=list)
    reinit_steps: list = field(default_factory=list)
    kinematics: np.ndarray | None = None   # (k, 2) speed, heading

    @property
    def k(self) -> int:
        return len(self.weights)

    @property
    def components(self):
        return list(zip(self.weights, self.means, self.covs))


def floor_cov(cov: np.ndarray, floor: float = COV_FLOOR) -> np.ndarray:
    """Clip eigenvalues of (a stack of) symmetric matrices from below."""
    vals, vecs = np.linalg.eigh(cov)
    vals = np.maximum(vals, floor)
    return (vecs * vals[..., None, :]) @ np.swapaxes(vecs, -1, -2)


def _log_gauss(x: np.ndarray, means: np.ndarray, covs: np.ndarray) -> np.ndarray:
    """(n, k) log densities of 2-D Gaussians, closed-form 2x2 inverse."""
    a, b, d = covs[:, 0, 0], covs[:, 0, 1], covs[:, 1, 1]
    det = a * d - b * b
    dx = x[:, None, 0] - means[None, :, 0]
    dy = x[:, None, 1] - means[None, :, 1]
    maha = (d * dx * dx - 2 * b * dx * dy + a * dy * dy) / det
    return -0.5 * maha - 0.5 * np.log(det) - _LOG_2PI


def _weighted_cov(x, w, mean):
    d = x - mean
    return (w[:, None] * d).T @ d / w.sum()


def _kmeanspp(x, w, k, gen):
    """Greedy weighted k-means++ seeding."""
    centers = [x[multinomial_indices(w, 1, gen)[0]]]
    d2 = ((x - centers[0]) ** 2).sum(1)
    trials = 2 + int(math.log(k)) if k > 1 else 1
    for _ in range(1, k):
        cand = multinomial_indices(w * d2, trials, gen)
        best, best_pot, best_d2 = None, math.inf, None
        for c in cand:
            nd2 = np.minimum(d2, ((x - x[c]) ** 2).sum(1))
            pot = float((w * nd2).sum())
            if pot < best_pot:
                best, best_pot, best_d2 = c, pot, nd2
        centers.append(x[best])
        d2 = best_d2
    return np.array(centers)


def _m_step(x, w, resp, floor):
    nk = resp.T @ w
    means = (resp * w[:, None]).T @ x / nk[:, None]
    covs = np.empty((len(nk), 2, 2))
    for j in range(len(nk)):
        covs[j] = _weighted_cov(x, w * resp[:, j], means[j])
    return nk, means, floor_cov(covs, floor)


def fit(cloud: WeightedCloud, k: int, rng: RandomLike = 0, max_iter: int = 50,
        tol: float = 1e-6, cov_floor: float = COV_FLOOR) -> GaussianMixture:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    keep = cloud.weights > 0
    x = np.ascontiguousarray(cloud.states[keep, :2])
    w = cloud.weights[keep] / cloud.weights[keep].sum()
    distinct = len(np.unique(x, axis=0))
    if k > distinct:
        raise ValueError(f"cannot fit {k} components to {distinct} distinct positions")
    gen = as_generator(rng)

    centers = _kmeanspp(x, w, k, gen)
    hard = np.argmin(((x[:, None, :] - centers[None]) ** 2).sum(-1), axis=1)
    resp = np.zeros((len(x), k))
    resp[np.arange(len(x)), hard] = 1.0
    nk, means, covs = _m_step(x, w, resp, cov_floor)
    weights = nk / nk.sum()

    global_cov = floor_cov(_weighted_cov(x, w, w @ x), cov_floor)
    reinitialized = np.zeros(k, dtype=bool)
    history, reinit_steps = [], []
    for it in range(max_iter):
        with np.errstate(divide="ignore"):
            logp = np.log(weights)[None, :] + _log_gauss(x, means, covs)
        lse = logsumexp(logp, axis=1)
        ll = float(w @ lse)
        history.append(ll)
        if len(history) > 1 and abs(ll - history[-2]) < tol * abs(history[-2]):
            break
        resp = np.exp(logp - lse[:, None])
        nk, means, covs = _m_step(x, w, resp, cov_floor)
        weights = nk / nk.sum()

        dead = weights < DEGENERATE_WEIGHT
        if dead.any():
            reinit_steps.append(it)
            for j in np.flatnonzero(dead & ~reinitialized):
                means[j] = x[np.argmin(lse)]
                covs[j] = global_cov
                weights[j] = 1.0 / len(weights)
                reinitialized[j] = True
            drop = dead & reinitialized & (weights < DEGENERATE_WEIGHT)
            if drop.any():
                means, covs, weights = means[~drop], covs[~drop], weights[~drop]
                reinitialized = reinitialized[~drop]
            weights = weights / weights.sum()

    mix = GaussianMixture(weights, means, covs, history, reinit_steps)
    if cloud.dim > HEADING:
        mix.kinematics = _peak_kinematics(cloud.states[keep], w, mix)
    return mix


def _peak_kinematics(states, w, mix):
    logp = np.log(mix.weights)[None, :] + _log_gauss(states[:, :2], mix.means, mix.covs)
    label = np.argmax(logp, axis=1)
    out = np.full((mix.k, 2), np.nan)
    for j in range(mix.k):
        m = label == j
        wj = w[m]
        if not wj.sum() > 0:
            continue
        out[j, 0] = wj @ states[m, SPEED] / wj.sum()
        h = states[m, HEADING]
        out[j, 1] = float(wrap_angles(math.atan2(wj @ np.sin(h), wj @ np.cos(h))))
    return out


def extract_peaks(mixture: GaussianMixture, expected_count: float) -> list[Peak]:
    """One peak per component, heaviest first."""
    kin = mixture.kinematics
    peaks = []
    for j in range(mixture.k):
        sp, hd = (kin[j] if kin is not None else (math.nan, math.nan))
        peaks.append(Peak(float(mixture.means[j, 0]), float(mixture.means[j, 1]),
                          float(mixture.weights[j] * expected_count), float(sp), float(hd)))
    return sorted(peaks, key=lambda p: -p.mass)


def choose_k(expected_count: float) -> int:
    if expected_count <= 1e-3:
        return 0
    return max(1, math.floor(expected_count + 0.5))


def detect_peaks(cloud: WeightedCloud, rng: RandomLike = 0, **kw) -> tuple[list[Peak], GaussianMixture | None]:
    """Fit ``choose_k(mass)`` components and return the peaks."""
    k = choose_k(cloud.mass)
    if k == 0 or not len(cloud):
        return [], None
    distinct = len(np.unique(cloud.states[cloud.weights > 0, :2], axis=0))
    mix = fit(cloud, min(k, distinct), rng, **kw)
    return extract_peaks(mix, cloud.mass), mix


def mass_grid(cloud: WeightedCloud, tmap) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Particle mass binned on the terrain grid: (row, col, mass) of nonzero cells.

    Rows count from the southern edge, as in :class:`~phdtrack.terrain.TerrainMap`.
    """
    row, col, inside = tmap.cell_index(cloud.states[:, 0], cloud.states[:, 1])
    flat = row[inside] * tmap.width + col[inside]
    grid = np.bincount(flat, weights=cloud.weights[inside], minlength=tmap.width * tmap.height)
    nz = np.flatnonzero(grid)
    return nz // tmap.width, nz % tmap.width, grid[nz]
