"""Latin hypercube designs for the initial population."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BoxBounds

__all__ = ["LhsPlan", "lhs_sample", "scale_plan"]


@dataclass(frozen=True)
class LhsPlan:
    """An ``n x d`` design on the unit cube, one sample per stratum and column."""

    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        return self.matrix.shape[1]


def lhs_sample(n: int, d: int, rng: np.random.Generator) -> LhsPlan:
    """Classic Latin hypercube sample.

    Each column is an independent random permutation of the strata
    ``[k/n, (k+1)/n)`` with a uniform offset inside its stratum.
    """
    if n < 1 or d < 1:
        raise ValueError(f"n and d must be >= 1, got n={n}, d={d}")
    strata = np.column_stack([rng.permutation(n) for _ in range(d)])
    u = (strata + rng.random((n, d))) / n
    # guard against (k + u)/n rounding up to the next stratum edge
    u = np.minimum(u, np.nextafter((strata + 1) / n, 0.0))
    return LhsPlan(u)


def scale_plan(plan: LhsPlan, bounds: BoxBounds) -> np.ndarray:
    """Map the unit design affinely onto ``bounds``; returns an ``(n, d)`` array."""
    if plan.d != bounds.dim:
        raise ValueError(f"plan has {plan.d} columns but bounds have dimension {bounds.dim}")
    return bounds.lower + plan.matrix * bounds.width
