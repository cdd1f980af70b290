"""Lipschitz-constant estimation and the cone underestimator surrogate.

The estimate is snapped upward onto the geometric grid ``(1 + alpha)**i``,
i.e. it is the smallest grid value that is not below the largest observed
slope ``|f(X_j) - f(X_l)| / ||X_j - X_l||`` over all archive pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Archive

__all__ = [
    "LipschitzModel",
    "SlopeCache",
    "max_pairwise_slope",
    "grid_exponent",
    "estimate_k",
    "lipschitz_value",
    "select_min_lipschitz",
]


def max_pairwise_slope(x, f) -> float:
    """Brute-force O(t^2) largest slope between any two distinct points."""
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    best = 0.0
    for j in range(len(f)):
        for l in range(j + 1, len(f)):
            r = float(np.linalg.norm(x[j] - x[l]))
            if r > 0.0:
                best = max(best, abs(f[j] - f[l]) / r)
    return best


class SlopeCache:
    """Incrementally maintained maximum pairwise slope of an archive.

    Only pairs involving points appended since the last update are scanned;
    archives never drop points, so the running maximum is exact.
    """

    def __init__(self):
        self.max_slope = 0.0
        self._seen = 0

    def update(self, archive: Archive) -> float:
        n = len(archive)
        if n < self._seen:
            raise ValueError("archive shrank since the last update; use a fresh cache")
        f = archive.f
        dist = archive.distances
        for j in range(max(self._seen, 1), n):
            r = dist[j, :j]
            slopes = np.abs(f[j] - f[:j]) / r
            self.max_slope = max(self.max_slope, float(slopes.max()))
        self._seen = n
        return self.max_slope


def grid_exponent(slope: float, alpha: float) -> int:
    """Smallest integer ``i`` with ``slope <= (1 + alpha)**i``.

    The logarithm ratio is corrected by at most a step either way so that the
    bracketing ``(1+alpha)**(i-1) < slope <= (1+alpha)**i`` holds in floating
    point as well.
    """
    if slope <= 0.0:
        raise ValueError("slope must be positive")
    base = 1.0 + alpha
    i = math.ceil(math.log(slope) / math.log(base))
    while base ** (i - 1) >= slope:
        i -= 1
    while base**i < slope:
        i += 1
    return i


@dataclass(frozen=True)
class LipschitzModel:
    """Fitted cone underestimator ``max_i f(X_i) - k_hat * ||x - X_i||``."""

    k_hat: float
    alpha: float
    max_slope: float
    centers: np.ndarray
    values: np.ndarray

    def __call__(self, x) -> np.ndarray | float:
        return lipschitz_value(self, x)


def estimate_k(archive: Archive, alpha: float = 0.01, cache: SlopeCache | None = None) -> LipschitzModel:
    """Fit the Lipschitz model on every point of ``archive``.

    A flat archive (fewer than two points, or all values equal) yields
    ``k_hat = 0``, whose underestimator is the constant ``max f``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if len(archive) < 1:
        raise ValueError("archive is empty")
    if cache is None:
        cache = SlopeCache()
    slope = cache.update(archive)
    k_hat = (1.0 + alpha) ** grid_exponent(slope, alpha) if slope > 0.0 else 0.0
    return LipschitzModel(
        k_hat=k_hat,
        alpha=alpha,
        max_slope=slope,
        centers=np.array(archive.x),
        values=np.array(archive.f),
    )


def lipschitz_value(model: LipschitzModel, x):
    """Evaluate the underestimator at one point or at each row of a 2-D array."""
    if model.centers.shape[0] == 0:
        raise ValueError("model has no centers")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = np.atleast_2d(x)
    if xs.shape[1] != model.centers.shape[1]:
        raise ValueError("dimension mismatch between x and model centers")
    r = np.sqrt(np.sum((xs[:, None, :] - model.centers[None, :, :]) ** 2, axis=2))
    out = np.max(model.values[None, :] - model.k_hat * r, axis=1)
    return float(out[0]) if single else out


def select_min_lipschitz(model: LipschitzModel, candidates) -> int:
    """Index of the candidate with the lowest underestimator value (first on ties)."""
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    if candidates.shape[0] == 0 or candidates.size == 0:
        raise ValueError("no candidates given")
    return int(np.argmin(lipschitz_value(model, candidates)))
