import math
import warnings

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from lsade.rbf import (
    KERNELS,
    LAMBDA_LADDER,
    RbfFitError,
    RbfKernel,
    kernel_phi,
    rbf_fit,
    rbf_value,
    select_min_rbf,
)


def test_kernel_values():
    assert kernel_phi(RbfKernel("multiquadric", 1.0), 0.0) == 1.0
    assert kernel_phi(RbfKernel("cubic"), 2.0) == 8.0
    assert kernel_phi(RbfKernel("thin_plate_spline"), 0.0) == 0.0
    assert kernel_phi(RbfKernel("thin_plate_spline"), math.e) == pytest.approx(math.e**2)
    assert kernel_phi(RbfKernel("linear"), 3.5) == 3.5
    assert kernel_phi(RbfKernel("gaussian", 2.0), 2.0) == pytest.approx(math.exp(-1.0))
    with pytest.raises(ValueError):
        kernel_phi(RbfKernel("cubic"), -1.0)


def test_kernel_aliases_and_validation():
    assert RbfKernel("MQ").kind == "multiquadric"
    assert RbfKernel("tps").kind == "thin_plate_spline"
    with pytest.raises(ValueError):
        RbfKernel("wendland")
    with pytest.raises(ValueError):
        RbfKernel("gaussian", 0.0)


def test_hand_solved_two_point_model():
    # Phi = [[1, sqrt2], [sqrt2, 1]], f = (0, 1)  ->  w = (sqrt2, -1)
    m = rbf_fit([[0.0], [1.0]], [0.0, 1.0], RbfKernel("multiquadric", 1.0))
    np.testing.assert_allclose(m.weights, [math.sqrt(2.0), -1.0], rtol=1e-12)
    assert m.regularization == 0.0
    assert rbf_value(m, [0.0]) == pytest.approx(0.0, abs=1e-12)
    assert rbf_value(m, [1.0]) == pytest.approx(1.0, abs=1e-12)


def test_constant_data_gaussian():
    x = np.random.default_rng(0).uniform(-1, 1, (12, 3))
    m = rbf_fit(x, np.full(12, 3.0), RbfKernel("gaussian"))
    np.testing.assert_allclose(rbf_value(m, x), 3.0, atol=1e-6)


def test_constant_data_linear_at_centers():
    x = np.random.default_rng(1).uniform(0, 1, (10, 2))
    m = rbf_fit(x, np.full(10, -2.0), RbfKernel("linear"))
    np.testing.assert_allclose(rbf_value(m, x), -2.0, atol=1e-6)


def test_fit_preconditions():
    with pytest.raises(ValueError):
        rbf_fit([[0.0]], [1.0], RbfKernel())
    with pytest.raises(ValueError):
        rbf_fit([[0.0], [1e-9]], [1.0, 2.0], RbfKernel())
    m = rbf_fit([[0.0], [1.0]], [0.0, 1.0], RbfKernel())
    with pytest.raises(ValueError):
        rbf_value(m, [0.0, 1.0])


def test_select_min_on_smooth_data():
    # f(x) = (x - 1)^2 sampled at 0, 1, 2: the interpolant is lowest at the center x = 1
    m = rbf_fit([[0.0], [1.0], [2.0]], [1.0, 0.0, 1.0], RbfKernel("multiquadric"))
    cands = np.array([[0.0], [2.0], [1.0], [0.25]])
    direct = [rbf_value(m, c) for c in cands]
    assert int(np.argmin(direct)) == 2
    assert select_min_rbf(m, cands) == 2
    assert select_min_rbf(m, cands[:1]) == 0
    assert select_min_rbf(m, np.array([[0.5], [0.5]])) == 0


def test_ladder_escalates_for_singular_matrix():
    # exp(-r^2/c^2) rounds to exactly 1 for every pair: Phi is the all-ones matrix
    x = np.array([[0.0], [1e-3], [2e-3]])
    m = rbf_fit(x, [0.0, 1.0, 0.0], RbfKernel("gaussian", 1e6))
    assert m.regularization > 0.0


def test_all_ladder_values_failing_is_an_error():
    with pytest.raises(RbfFitError):
        rbf_fit([[0.0], [1e110]], [0.0, 1.0], RbfKernel("cubic"))


@pytest.mark.parametrize("x, kernel", [
    (np.random.default_rng(4).uniform(0, 1e-2, (25, 2)), RbfKernel("multiquadric", 1.0)),
    (np.array([[0.0], [1e-3], [2e-3]]), RbfKernel("gaussian", 1e6)),
])
def test_ladder_picks_smallest_passing_lambda(x, kernel):
    n = x.shape[0]
    f = np.random.default_rng(5).normal(size=n)
    m = rbf_fit(x, f, kernel)
    phi = kernel_phi(kernel, np.linalg.norm(x[:, None] - x[None], axis=2))
    tol = 1e-6 * (1 + np.abs(f).max())
    k = LAMBDA_LADDER.index(m.regularization)
    np.testing.assert_array_less(np.abs((phi + m.regularization * np.eye(n)) @ m.weights - f), tol)
    for lam in LAMBDA_LADDER[:k]:
        a = phi + lam * np.eye(n)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                w = scipy.linalg.solve(a, f, assume_a="sym")
        except np.linalg.LinAlgError:
            continue
        assert not (np.all(np.isfinite(w)) and np.abs(a @ w - f).max() <= tol)


@st.composite
def point_sets(draw):
    d = draw(st.integers(1, 10))
    n = draw(st.integers(2, 50))
    rng = np.random.default_rng(draw(st.integers(0, 2**31)))
    x = rng.uniform(-1, 1, (n, d))
    f = rng.normal(size=n) * 10.0
    return x, f


@settings(max_examples=40, deadline=None)
@given(point_sets(), st.sampled_from(KERNELS))
def test_interpolation_at_centers(data, kind):
    x, f = data
    m = rbf_fit(x, f, RbfKernel(kind))
    if m.regularization == 0.0:
        np.testing.assert_array_less(np.abs(rbf_value(m, x) - f), 1e-6 * (1 + np.abs(f)) + 1e-300)


@settings(max_examples=25, deadline=None)
@given(point_sets(), st.sampled_from(KERNELS), st.integers(0, 2**31))
def test_permutation_symmetry(data, kind, seed):
    x, f = data
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(f))
    a = rbf_fit(x, f, RbfKernel(kind))
    b = rbf_fit(x[perm], f[perm], RbfKernel(kind))
    probes = rng.uniform(-1, 1, (5, x.shape[1]))
    if a.regularization == b.regularization == 0.0:
        scale = 1 + np.abs(f).max()
        np.testing.assert_allclose(rbf_value(a, probes), rbf_value(b, probes), atol=1e-9 * scale * max(1.0, np.abs(a.weights).sum()))
