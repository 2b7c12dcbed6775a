"""Motion/observation model adapters used by the particle filters.

The filters in :mod:`phdtrack.phd` and :mod:`phdtrack.bootstrap` only talk
to a model through four methods:

``propagate(cloud, stream) -> WeightedCloud``
    one prediction step; must preserve ``cloud.mass``.
``log_likelihood(report, states) -> ndarray``
    log observation density of ``report`` for every state row.
``birth(report, n, mass, stream) -> WeightedCloud``
    ``n`` draws from the birth density seeded by ``report``, total ``mass``.
``invert(report, n, stream) -> ndarray``
    ``n`` states consistent with ``report`` alone (flat-prior posterior).

:class:`TerrainModel` is the vehicle-in-terrain model.  Test suites plug in
small linear-Gaussian models with the same four methods.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sensing
from .dynamics import MODES, apply_terrain, map_chunks, propagate_cloud
from .streams import KeyedStream
from .terrain import TerrainMap
from .types import SIGMA_W, FilterParams, NoiseSpec, Report, WeightedCloud


@dataclass
class TerrainModel:
    tmap: TerrainMap
    dt: float = 5.0
    sigma_w: NoiseSpec = SIGMA_W
    mode: str = "resample"
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown terrain mode {self.mode!r}; expected one of {MODES}")

    @classmethod
    def from_params(cls, params: FilterParams, tmap: TerrainMap, **kw) -> "TerrainModel":
        return cls(tmap, params.dt, params.sigma_w, **kw)

    def propagate(self, cloud: WeightedCloud, stream: KeyedStream) -> WeightedCloud:
        return propagate_cloud(cloud, self.dt, self.sigma_w, self.tmap, stream,
                               self.mode, self.workers)

    def log_likelihood(self, report: Report, states: np.ndarray) -> np.ndarray:
        parts = map_chunks(lambda a, b: sensing.log_likelihood_rows(report, states[a:b]),
                           len(states), self.workers)
        return np.concatenate(parts) if len(parts) > 1 else parts[0]

    def birth(self, report: Report, n: int, mass: float, stream: KeyedStream) -> WeightedCloud:
        rows = sensing.birth_rows(report, n, self.dt, self.sigma_w, stream)
        return apply_terrain(WeightedCloud(rows, np.full(n, mass / n)), self.tmap, stream, self.mode)

    def invert(self, report: Report, n: int, stream: KeyedStream) -> np.ndarray:
        return sensing.invert_rows(report, n, stream)


def as_model(model_or_map, params: FilterParams):
    """Accept either a ready model or a bare terrain map."""
    if isinstance(model_or_map, TerrainMap):
        return TerrainModel.from_params(params, model_or_map)
    return model_or_map
