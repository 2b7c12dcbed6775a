"""Particle PHD filter for multi-vehicle tracking in terrain."""

from .phd import FilterOutput, PhdFilter, PhdParticleSet, filter_step, predict, resample, update
from .types import FilterParams, NoiseSpec, Report, TargetState, WeightedCloud

__version__ = "0.1.0"
