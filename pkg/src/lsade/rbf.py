"""Radial basis function interpolation surrogates.

Plain interpolation without a polynomial tail: the weights solve
``(Phi + lam * I) w = f`` with ``Phi[i, j] = phi(||X_i - X_j||)``. ``lam``
starts at zero and escalates through a short Tikhonov ladder only when the
direct solve fails or leaves a residual above ``1e-6 * (1 + ||f||_inf)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import DUP_TOL

__all__ = [
    "KERNELS",
    "RbfKernel",
    "RbfModel",
    "RbfFitError",
    "LAMBDA_LADDER",
    "kernel_phi",
    "rbf_fit",
    "rbf_value",
    "select_min_rbf",
]

KERNELS = ("multiquadric", "cubic", "thin_plate_spline", "linear", "gaussian")

_ALIASES = {
    "mq": "multiquadric",
    "multiquadratic": "multiquadric",
    "c": "cubic",
    "tps": "thin_plate_spline",
    "thin_plate": "thin_plate_spline",
    "lin": "linear",
    "gauss": "gaussian",
}

LAMBDA_LADDER = (0.0, 1e-12, 1e-10, 1e-8, 1e-6)
RESIDUAL_RTOL = 1e-6


class RbfFitError(np.linalg.LinAlgError):
    """No value of the regularization ladder produced an acceptable solve."""


@dataclass(frozen=True)
class RbfKernel:
    """Basis function ``kind`` with shape parameter ``c`` (MQ and Gaussian only)."""

    kind: str = "multiquadric"
    c: float = 1.0

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.lower(), self.kind.lower())
        if kind not in KERNELS:
            raise ValueError(f"unknown kernel {self.kind!r}; choose from {', '.join(KERNELS)}")
        if not self.c > 0:
            raise ValueError("shape parameter c must be positive")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "c", float(self.c))

    def __call__(self, r):
        return kernel_phi(self, r)


def kernel_phi(kernel: RbfKernel, r):
    """Evaluate the basis function at distance(s) ``r >= 0``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("distances must be non-negative")
    kind, c = kernel.kind, kernel.c
    if kind == "multiquadric":
        out = np.sqrt(r * r + c * c)
    elif kind == "cubic":
        # overflow to inf is caught by rbf_fit
        with np.errstate(over="ignore"):
            out = r**3
    elif kind == "thin_plate_spline":
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(r > 0, r * r * np.log(np.where(r > 0, r, 1.0)), 0.0)
    elif kind == "linear":
        out = r.copy()
    else:
        out = np.exp(-(r * r) / (c * c))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RbfModel:
    kernel: RbfKernel
    centers: np.ndarray
    weights: np.ndarray
    regularization: float

    def __call__(self, x):
        return rbf_value(self, x)


def _pairwise(x: np.ndarray) -> np.ndarray:
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * x @ x.T
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(np.maximum(d2, 0.0))


def rbf_fit(x, f, kernel: RbfKernel, distances=None) -> RbfModel:
    """Fit an interpolating RBF through the rows of ``x`` with values ``f``.

    Parameters
    ----------
    x : array_like, shape (n, d)
        Pairwise distinct centers, ``n >= 2``.
    f : array_like, shape (n,)
        Values to interpolate.
    kernel : RbfKernel
    distances : array_like, shape (n, n), optional
        Precomputed pairwise distances of ``x`` (e.g. from the archive).

    Raises
    ------
    ValueError
        Fewer than two centers, or two centers closer than the duplicate
        tolerance.
    RbfFitError
        Every value of the regularization ladder failed the residual test.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    f = np.asarray(f, dtype=float).reshape(-1)
    n = x.shape[0]
    if n < 2:
        raise ValueError("at least two centers are needed to fit an RBF")
    if f.shape[0] != n:
        raise ValueError("x and f have different lengths")
    r = _pairwise(x) if distances is None else np.asarray(distances, dtype=float)
    if r.shape != (n, n):
        raise ValueError("distances must be an (n, n) matrix")
    off = r + np.diag(np.full(n, np.inf))
    if off.min() < DUP_TOL:
        raise ValueError("centers must be pairwise distinct")

    phi = kernel_phi(kernel, r)
    if not np.all(np.isfinite(phi)):
        raise RbfFitError(f"{kernel.kind} kernel matrix has non-finite entries")
    tol = RESIDUAL_RTOL * (1.0 + np.max(np.abs(f)))
    for lam in LAMBDA_LADDER:
        a = phi + lam * np.eye(n) if lam else phi
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                w = scipy.linalg.solve(a, f, assume_a="sym", check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            continue
        if not np.all(np.isfinite(w)):
            continue
        if np.max(np.abs(a @ w - f)) <= tol:
            return RbfModel(kernel=kernel, centers=x.copy(), weights=w, regularization=lam)
    raise RbfFitError(
        f"{kernel.kind} RBF system with {n} centers could not be solved "
        f"for any regularization in {LAMBDA_LADDER}"
    )


def rbf_value(model: RbfModel, x):
    """Surrogate value ``sum_j w_j phi(||x - X_j||)`` at a point or each row of x."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = np.atleast_2d(x)
    if xs.shape[1] != model.centers.shape[1]:
        raise ValueError(
            f"expected vectors of length {model.centers.shape[1]}, got {xs.shape[1]}"
        )
    r = np.sqrt(np.sum((xs[:, None, :] - model.centers[None, :, :]) ** 2, axis=2))
    out = kernel_phi(model.kernel, r) @ model.weights
    return float(out[0]) if single else out


def select_min_rbf(model: RbfModel, candidates) -> int:
    """Index of the candidate with the lowest surrogate value (first on ties)."""
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    if candidates.size == 0:
        raise ValueError("no candidates given")
    return int(np.argmin(rbf_value(model, candidates)))
