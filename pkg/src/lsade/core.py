"""Domain types shared by every part of the optimizer.

The archive holds every exactly evaluated point of a run. It keeps the
decision vectors in a growing array together with their pairwise Euclidean
distances, so the surrogates can be refit every iteration without recomputing
the full distance matrix.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DUP_TOL",
    "BoxBounds",
    "EvaluatedPoint",
    "Archive",
    "BudgetCounter",
    "BudgetExhausted",
    "NonFiniteObjectiveError",
    "RngStream",
    "clamp_to_bounds",
]

#: Two decision vectors closer than this (Euclidean) are the same point.
DUP_TOL = 1e-6


class NonFiniteObjectiveError(ValueError):
    """Raised when an objective returns NaN or an infinite value."""


class BudgetExhausted(RuntimeError):
    """Raised when an evaluation is requested past ``nfe_max``."""


@dataclass(frozen=True)
class BoxBounds:
    """Axis-aligned search domain ``[lower, upper]``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float)).copy()
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float)).copy()
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("lower and upper must be 1-D vectors of equal length")
        if lower.size < 1:
            raise ValueError("bounds must have at least one dimension")
        if not np.all(np.isfinite(lower)) or not np.all(np.isfinite(upper)):
            raise ValueError("bounds must be finite")
        if np.any(lower >= upper):
            raise ValueError("lower must be strictly less than upper in every dimension")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def uniform(cls, low: float, high: float, dim: int) -> "BoxBounds":
        return cls(np.full(dim, float(low)), np.full(dim, float(high)))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x, atol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))


def clamp_to_bounds(x, bounds: BoxBounds) -> np.ndarray:
    """Project ``x`` componentwise onto the box."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != bounds.dim:
        raise ValueError(f"expected vectors of length {bounds.dim}, got {x.shape[-1]}")
    return np.clip(x, bounds.lower, bounds.upper)


@dataclass(frozen=True)
class EvaluatedPoint:
    """A decision vector together with its exact objective value."""

    x: np.ndarray
    f: float

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        x.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "f", float(self.f))


class Archive:
    """Ordered, duplicate-free collection of exactly evaluated points.

    Parameters
    ----------
    dim : int
        Length of every decision vector.
    dup_tol : float, optional
        Euclidean distance below which a new point counts as a duplicate.
    capacity : int, optional
        Initial storage size; grows automatically.
    """

    def __init__(self, dim: int, dup_tol: float = DUP_TOL, capacity: int = 64):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = int(dim)
        self.dup_tol = float(dup_tol)
        capacity = max(int(capacity), 4)
        self._x = np.empty((capacity, self.dim))
        self._f = np.empty(capacity)
        self._dist = np.zeros((capacity, capacity))
        self._size = 0
        self._best = -1

    def __len__(self) -> int:
        return self._size

    def __iter__(self):
        for i in range(self._size):
            yield self[i]

    def __getitem__(self, i: int) -> EvaluatedPoint:
        if not -self._size <= i < self._size:
            raise IndexError("archive index out of range")
        i %= self._size
        return EvaluatedPoint(self._x[i], self._f[i])

    @property
    def x(self) -> np.ndarray:
        """Read-only view of the decision vectors, shape ``(n, dim)``."""
        view = self._x[: self._size]
        view.flags.writeable = False
        return view

    @property
    def f(self) -> np.ndarray:
        """Read-only view of the objective values, shape ``(n,)``."""
        view = self._f[: self._size]
        view.flags.writeable = False
        return view

    @property
    def distances(self) -> np.ndarray:
        """Read-only view of the pairwise Euclidean distance matrix."""
        view = self._dist[: self._size, : self._size]
        view.flags.writeable = False
        return view

    @property
    def best_index(self) -> int:
        if self._size == 0:
            raise ValueError("archive is empty")
        return self._best

    @property
    def best(self) -> EvaluatedPoint:
        return self[self.best_index]

    def _grow(self):
        cap = 2 * self._x.shape[0]
        x = np.empty((cap, self.dim))
        f = np.empty(cap)
        dist = np.zeros((cap, cap))
        n = self._size
        x[:n], f[:n], dist[:n, :n] = self._x[:n], self._f[:n], self._dist[:n, :n]
        self._x, self._f, self._dist = x, f, dist

    def distances_to(self, x) -> np.ndarray:
        """Euclidean distances from ``x`` to every stored point."""
        x = np.asarray(x, dtype=float)
        if self._size == 0:
            return np.empty(0)
        return np.sqrt(np.sum((self._x[: self._size] - x) ** 2, axis=1))

    def is_duplicate(self, x) -> bool:
        d = self.distances_to(x)
        return bool(d.size and d.min() < self.dup_tol)

    def insert(self, point: EvaluatedPoint) -> bool:
        """Append ``point`` unless it duplicates a stored one.

        Returns ``True`` if the point was added and ``False`` if it was
        rejected as a duplicate (the archive is then unchanged).
        """
        x = np.asarray(point.x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {x.shape}")
        if not np.isfinite(point.f):
            raise NonFiniteObjectiveError(f"objective value {point.f!r} at x={x.tolist()} is not finite")
        d = self.distances_to(x)
        if d.size and d.min() < self.dup_tol:
            return False
        if self._size == self._x.shape[0]:
            self._grow()
        n = self._size
        self._x[n] = x
        self._f[n] = point.f
        self._dist[n, :n] = d
        self._dist[:n, n] = d
        self._dist[n, n] = 0.0
        self._size += 1
        # strict < keeps the earliest insertion on ties
        if self._best < 0 or point.f < self._f[self._best]:
            self._best = n
        return True

    def best_indices(self, c: int) -> np.ndarray:
        """Indices of the ``min(c, len)`` best points, ascending by f."""
        if c < 1:
            raise ValueError("c must be >= 1")
        if self._size == 0:
            raise ValueError("archive is empty")
        order = np.argsort(self._f[: self._size], kind="stable")
        return order[: min(c, self._size)]

    def best_c(self, c: int) -> list[EvaluatedPoint]:
        """The ``min(c, len)`` points with smallest f; ties keep insertion order."""
        return [self[int(i)] for i in self.best_indices(c)]


@dataclass
class BudgetCounter:
    """Evaluation and iteration bookkeeping for one run."""

    nfe_max: int
    nfe: int = 0
    iter: int = 0

    def __post_init__(self):
        if self.nfe_max < 1:
            raise ValueError("nfe_max must be >= 1")

    @property
    def remaining(self) -> int:
        return self.nfe_max - self.nfe

    @property
    def exhausted(self) -> bool:
        return self.nfe >= self.nfe_max

    def spend(self, n: int = 1):
        if self.nfe + n > self.nfe_max:
            raise BudgetExhausted(f"budget of {self.nfe_max} evaluations exceeded")
        self.nfe += n

    def tick(self) -> int:
        self.iter += 1
        return self.iter


# Fixed spawn keys: a new named stream never shifts the draws of existing ones.
_STREAM_KEYS = {
    "sampling": 0,
    "de": 1,
    "random_search": 2,
}


@dataclass
class RngStream:
    """Seeded randomness for one run, split into named sub-streams."""

    seed: int
    _streams: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.seed = int(self.seed) & 0xFFFFFFFFFFFFFFFF

    def stream(self, name: str) -> np.random.Generator:
        """Generator dedicated to ``name``; created once, then reused."""
        if name not in self._streams:
            key = _STREAM_KEYS.get(name, zlib.crc32(name.encode()))
            ss = np.random.SeedSequence(self.seed, spawn_key=(key,))
            self._streams[name] = np.random.Generator(np.random.PCG64(ss))
        return self._streams[name]
