"""Index selection for resampling weighted particle sets."""

from __future__ import annotations

import numpy as np

SCHEMES = ("multinomial", "systematic")


def _cdf(weights: np.ndarray) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ValueError("weights must be finite and nonnegative")
    cdf = np.cumsum(weights)
    if not cdf.size or cdf[-1] <= 0:
        raise ValueError("weights must have positive total")
    return cdf


def multinomial_indices(weights, count: int, gen: np.random.Generator) -> np.ndarray:
    """Independent draws with probability proportional to ``weights``."""
    cdf = _cdf(weights)
    # sorted queries make the CDF lookup cache friendly; draw order is irrelevant
    u = np.sort(gen.random(count)) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)


def systematic_indices(weights, count: int, gen: np.random.Generator) -> np.ndarray:
    """One uniform offset, ``count`` evenly spaced pointers into the CDF."""
    cdf = _cdf(weights)
    u = (gen.random() + np.arange(count)) / count * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)


def resample_indices(weights, count: int, gen: np.random.Generator,
                     scheme: str = "multinomial") -> np.ndarray:
    if count == 0:
        return np.empty(0, dtype=np.intp)
    if scheme == "multinomial":
        return multinomial_indices(weights, count, gen)
    if scheme == "systematic":
        return systematic_indices(weights, count, gen)
    raise ValueError(f"unknown resampling scheme {scheme!r}; expected one of {SCHEMES}")
