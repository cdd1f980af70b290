"""Local refinement: minimize an RBF fit of the best points inside their bounding box.

The minimizer is a projected quasi-Newton method (BFGS on the free
variables) with forward-difference gradients and Armijo backtracking. It only
ever accepts steps that lower the surrogate, so the returned point is never
worse than the start.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Archive
from .rbf import RbfKernel, RbfModel, rbf_fit, rbf_value

__all__ = [
    "LocalSearchConfig",
    "LocalBox",
    "local_bounds",
    "minimize_local",
    "local_step",
]

ARMIJO = 1e-4
MAX_HALVINGS = 60


@dataclass(frozen=True)
class LocalSearchConfig:
    """Settings of the local step.

    ``max_inner_iterations`` of ``None`` means ``100 * D``.
    """

    c_factor: int = 3
    max_inner_iterations: int | None = None
    gradient_step: float = 1e-7
    convergence_tol: float = 1e-8

    def __post_init__(self):
        if self.c_factor < 1:
            raise ValueError("c_factor must be >= 1")
        if self.max_inner_iterations is not None and self.max_inner_iterations < 1:
            raise ValueError("max_inner_iterations must be >= 1")
        if not (self.gradient_step > 0 and self.convergence_tol > 0):
            raise ValueError("gradient_step and convergence_tol must be positive")


@dataclass(frozen=True)
class LocalBox:
    lb: np.ndarray
    ub: np.ndarray

    def contains(self, x, atol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lb - atol) and np.all(x <= self.ub + atol))


def local_bounds(best_points) -> LocalBox:
    """Componentwise min/max over the given points."""
    pts = np.asarray(best_points, dtype=float)
    if pts.size == 0:
        raise ValueError("need at least one point")
    pts = np.atleast_2d(pts)
    return LocalBox(pts.min(axis=0), pts.max(axis=0))


def _fd_gradient(fun, x, fx, lb, ub, free, rel_step):
    h = rel_step * (1.0 + np.abs(x))
    # step backwards where a forward step would leave the box
    h = np.where(x + h <= ub, h, -h)
    idx = np.flatnonzero(free)
    g = np.zeros_like(x)
    if idx.size == 0:
        return g
    probes = np.repeat(x[None, :], idx.size, axis=0)
    probes[np.arange(idx.size), idx] += h[idx]
    g[idx] = (fun(probes) - fx) / h[idx]
    return g


def _projected(g, x, lb, ub, free):
    pg = np.where(free, g, 0.0)
    pg[(x <= lb) & (pg > 0)] = 0.0
    pg[(x >= ub) & (pg < 0)] = 0.0
    return pg


def minimize_local(model: RbfModel, box: LocalBox, start, cfg: LocalSearchConfig | None = None) -> np.ndarray:
    """Locally minimize ``model`` over ``box`` starting from ``start``.

    Raises
    ------
    ValueError
        If ``start`` lies outside ``box``.
    """
    cfg = cfg or LocalSearchConfig()
    lb = np.asarray(box.lb, dtype=float)
    ub = np.asarray(box.ub, dtype=float)
    x = np.asarray(start, dtype=float).copy()
    if x.shape != lb.shape:
        raise ValueError("start and box have different dimensions")
    span = np.maximum(ub - lb, 0.0)
    if not box.contains(x, atol=1e-12 * (1.0 + np.max(np.abs(x)))):
        raise ValueError("start point lies outside the local box")
    x = np.clip(x, lb, ub)
    free = ub > lb
    if not free.any():
        return x

    def fun(z):
        return rbf_value(model, z)

    d = x.size
    max_iter = cfg.max_inner_iterations or 100 * d
    fx = fun(x)
    g = _fd_gradient(fun, x, fx, lb, ub, free, cfg.gradient_step)
    hinv = None
    scaled = False
    for _ in range(max_iter):
        pg = _projected(g, x, lb, ub, free)
        pg_norm = np.max(np.abs(pg))
        if pg_norm < cfg.convergence_tol:
            break
        act = pg != 0.0
        if hinv is None:
            hinv = np.eye(d) * min(1.0, 0.1 * span.max() / pg_norm)
            scaled = False
        direction = np.zeros(d)
        direction[act] = -hinv[np.ix_(act, act)] @ g[act]
        if direction @ pg >= 0.0:
            hinv = np.eye(d) * min(1.0, 0.1 * span.max() / pg_norm)
            scaled = False
            direction = np.where(act, -hinv[0, 0] * g, 0.0)

        t = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS):
            xt = np.clip(x + t * direction, lb, ub)
            step = xt - x
            if not step.any():
                break
            ft = fun(xt)
            if ft <= fx + ARMIJO * min(0.0, g @ step) and ft < fx:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break

        gt = _fd_gradient(fun, xt, ft, lb, ub, free, cfg.gradient_step)
        y = gt - g
        sy = step @ y
        if sy > 1e-12 * np.linalg.norm(step) * np.linalg.norm(y):
            if not scaled:
                hinv = np.eye(d) * (sy / (y @ y))
                scaled = True
            rho = 1.0 / sy
            hy = hinv @ y
            hinv = (
                hinv
                - rho * (np.outer(step, hy) + np.outer(hy, step))
                + (rho * rho * (y @ hy) + rho) * np.outer(step, step)
            )
        x, fx, g = xt, ft, gt
    return x


def local_step(
    archive: Archive,
    kernel: RbfKernel,
    cfg: LocalSearchConfig | None = None,
    dim: int | None = None,
) -> np.ndarray | None:
    """Propose the local-surrogate minimizer, or ``None`` if it is already archived.

    The local model is fit on the best ``c_factor * D`` archive points (fewer
    if the archive is smaller) and minimized from the archive best inside the
    bounding box of those points.
    """
    cfg = cfg or LocalSearchConfig()
    if len(archive) < 2:
        raise ValueError("local step needs at least two archive points")
    dim = dim or archive.dim
    idx = archive.best_indices(cfg.c_factor * dim)
    x = archive.x[idx]
    model = rbf_fit(x, archive.f[idx], kernel, distances=archive.distances[np.ix_(idx, idx)])
    box = local_bounds(x)
    start = np.clip(archive.x[archive.best_index], box.lb, box.ub)
    xm = minimize_local(model, box, start, cfg)
    if archive.is_duplicate(xm):
        return None
    return xm
