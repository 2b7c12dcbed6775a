"""Value types and angle conventions shared across the tracker.

Vehicle states travel through the filter as rows of an ``(n, 4)`` float
array with columns ``[x, y, speed, heading]`` (meters, meters, m/s,
radians).  :class:`TargetState` is the single-row view of the same thing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

X, Y, SPEED, HEADING = 0, 1, 2, 3
STATE_DIM = 4

TWO_PI = 2.0 * math.pi


def wrap_heading(theta: float) -> float:
    """Map an angle to the canonical range [-pi, pi)."""
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValueError(f"heading must be finite, got {theta!r}")
    out = (theta + math.pi) % TWO_PI - math.pi
    if out >= math.pi:
        out -= TWO_PI
    return out


def wrap_angles(theta: np.ndarray) -> np.ndarray:
    """Vectorized :func:`wrap_heading` without the finiteness check."""
    out = np.mod(np.asarray(theta, dtype=float) + np.pi, TWO_PI) - np.pi
    return np.where(out >= np.pi, out - TWO_PI, out)


def canonicalize(states: np.ndarray) -> np.ndarray:
    """Wrap headings and clamp speeds in place; returns ``states``."""
    np.maximum(states[:, SPEED], 0.0, out=states[:, SPEED])
    states[:, HEADING] = wrap_angles(states[:, HEADING])
    return states


def birth_death_rates(p_fn: float, k_const: float) -> tuple[float, float]:
    """Birth and death probabilities from the miss probability.

    More missed reports means a new target takes longer to be confirmed by a
    second report, so the birth rate grows with ``p_fn``:
    ``p_b = k_const ** (1 - p_fn)`` and ``p_d = k_const``.
    """
    if not 0.0 < p_fn < 1.0:
        raise ValueError(f"p_fn must lie in (0, 1), got {p_fn}")
    if not 0.0 < k_const < 1.0:
        raise ValueError(f"k_const must lie in (0, 1), got {k_const}")
    return k_const ** (1.0 - p_fn), k_const


@dataclass(frozen=True)
class TargetState:
    x: float
    y: float
    speed: float
    heading: float

    def __post_init__(self):
        vals = (self.x, self.y, self.speed, self.heading)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite state {vals}")
        if self.speed < 0:
            raise ValueError(f"speed must be >= 0, got {self.speed}")
        object.__setattr__(self, "heading", wrap_heading(self.heading))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.speed, self.heading], dtype=float)

    @classmethod
    def from_array(cls, row) -> "TargetState":
        x, y, s, h = (float(v) for v in row)
        return cls(x, y, max(s, 0.0), h)


@dataclass(frozen=True)
class NoiseSpec:
    """Per-component standard deviations (m, m, m/s, rad)."""

    sigma_x: float
    sigma_y: float
    sigma_speed: float
    sigma_heading: float

    def __post_init__(self):
        if not all(v > 0 and math.isfinite(v) for v in self.as_tuple()):
            raise ValueError(f"noise components must be positive, got {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.sigma_x, self.sigma_y, self.sigma_speed, self.sigma_heading)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    def scaled(self, factor: float) -> "NoiseSpec":
        return NoiseSpec(*(v * factor for v in self.as_tuple()))


# Observer report uncertainty and motion noise of the terrain scenario.
SIGMA_R = NoiseSpec(50.0, 50.0, 1.0, math.pi / 8)
SIGMA_W = NoiseSpec(10.0, 10.0, 2.0, math.pi / 4)


@dataclass(frozen=True)
class Report:
    step: int
    observed: TargetState
    noise: NoiseSpec

    def __post_init__(self):
        if self.step < 0:
            raise ValueError(f"report step must be >= 0, got {self.step}")


@dataclass(frozen=True)
class FilterParams:
    n_per_unit: int = 1000
    p_fn: float = 0.1
    k_const: float = 0.01
    sigma_w: NoiseSpec = SIGMA_W
    max_count: float = 5.0
    dt: float = 5.0

    def __post_init__(self):
        birth_death_rates(self.p_fn, self.k_const)  # validates both
        if self.n_per_unit < 1:
            raise ValueError("n_per_unit must be >= 1")
        if not self.max_count > 0:
            raise ValueError("max_count must be > 0")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")

    @property
    def p_b(self) -> float:
        return birth_death_rates(self.p_fn, self.k_const)[0]

    @property
    def p_d(self) -> float:
        return self.k_const


@dataclass
class WeightedCloud:
    """Particles with nonnegative weights; ``mass`` is the weight total."""

    states: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim == 1:
            self.states = self.states.reshape(-1, 1)
        n = len(self.states)
        if self.weights is None:
            self.weights = np.full(n, 1.0 / n if n else 0.0)
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(self.weights) != n:
            raise ValueError(f"{n} states but {len(self.weights)} weights")

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @classmethod
    def empty(cls, dim: int = STATE_DIM) -> "WeightedCloud":
        return cls(np.empty((0, dim)), np.empty(0))

    @classmethod
    def concat(cls, clouds) -> "WeightedCloud":
        clouds = list(clouds)
        dim = clouds[0].dim if clouds else STATE_DIM
        clouds = [c for c in clouds if len(c)]
        if not clouds:
            return cls.empty(dim)
        return cls(np.concatenate([c.states for c in clouds]),
                   np.concatenate([c.weights for c in clouds]))
