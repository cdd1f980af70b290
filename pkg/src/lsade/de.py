"""DE/best/1 mutation with binomial crossover."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Archive, BoxBounds, clamp_to_bounds

__all__ = ["DeConfig", "mutate", "crossover", "sample_parents", "generate_children"]


@dataclass(frozen=True)
class DeConfig:
    """Differential evolution settings.

    ``n_children`` of ``None`` means one child per dimension.
    """

    f_weight: float = 0.5
    cr: float = 0.5
    n_children: int | None = None
    n_parents: int = 100

    def __post_init__(self):
        if not self.f_weight > 0:
            raise ValueError("f_weight must be positive")
        if not 0.0 <= self.cr <= 1.0:
            raise ValueError("cr must lie in [0, 1]")
        if self.n_children is not None and self.n_children < 1:
            raise ValueError("n_children must be >= 1")
        if self.n_parents < 3:
            raise ValueError("n_parents must be >= 3")


def mutate(best, x_i1, x_i2, f_weight: float) -> np.ndarray:
    """``best + f_weight * (x_i1 - x_i2)``, unclamped."""
    best, x_i1, x_i2 = (np.asarray(v, dtype=float) for v in (best, x_i1, x_i2))
    if not best.shape == x_i1.shape == x_i2.shape:
        raise ValueError("mutation vectors must have the same length")
    return best + f_weight * (x_i1 - x_i2)


def crossover(parent, mutant, cr: float, rng: np.random.Generator) -> np.ndarray:
    """Binomial crossover; component ``j_rand`` always comes from the mutant."""
    parent = np.asarray(parent, dtype=float)
    mutant = np.asarray(mutant, dtype=float)
    if parent.shape != mutant.shape:
        raise ValueError("parent and mutant must have the same length")
    d = parent.size
    take = rng.random(d) <= cr
    take[rng.integers(d)] = True
    return np.where(take, mutant, parent)


def sample_parents(n_archive: int, n_parents: int, rng: np.random.Generator) -> np.ndarray:
    """Archive indices of ``min(n_parents, n_archive)`` parents, without replacement."""
    p = min(n_parents, n_archive)
    return rng.choice(n_archive, size=p, replace=False)


def _pick_pair(p: int, own: int, rng: np.random.Generator) -> tuple[int, int]:
    # two distinct parent slots, both different from the child's own parent when possible
    pool = [k for k in range(p) if k != own] if p >= 3 else list(range(p))
    i1, i2 = rng.choice(len(pool), size=2, replace=False)
    return pool[i1], pool[i2]


def generate_children(
    archive: Archive, cfg: DeConfig, bounds: BoxBounds, rng: np.random.Generator
) -> np.ndarray:
    """Children for one iteration, shape ``(n_children, dim)``, all inside ``bounds``.

    Parents are sampled uniformly from the archive; child ``j`` crosses over
    against parent ``j mod p`` and mutates around the archive best.
    """
    n = len(archive)
    if n < 3:
        raise ValueError("DE needs at least three archive points")
    if archive.dim != bounds.dim:
        raise ValueError("archive and bounds have different dimensions")
    n_children = cfg.n_children or bounds.dim
    parents = archive.x[sample_parents(n, cfg.n_parents, rng)]
    p = parents.shape[0]
    best = archive.x[archive.best_index]
    children = np.empty((n_children, bounds.dim))
    for j in range(n_children):
        own = j % p
        i1, i2 = _pick_pair(p, own, rng)
        v = mutate(best, parents[i1], parents[i2], cfg.f_weight)
        children[j] = crossover(parents[own], v, cfg.cr, rng)
    return clamp_to_bounds(children, bounds)
