import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zetamoments.quadrature import QuadratureError, adaptive_simpson, tanh_sinh_batch, tanh_sinh_integrate


def test_constant_and_endpoint_singularity():
    assert abs(tanh_sinh_integrate(lambda x: np.ones_like(x), 0.0, 1.0) - 1) < 1e-14
    assert abs(tanh_sinh_integrate(lambda x: x**-0.5, 0.0, 1.0) - 2) < 1e-12
    assert abs(tanh_sinh_integrate(lambda x: np.log(x), 0.0, 1.0) + 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 8), st.floats(-5, 5), st.floats(0.01, 10))
def test_polynomials_exact(n, a, width):
    b = a + width
    got = tanh_sinh_integrate(lambda x: x**n, a, b)
    ref = (b ** (n + 1) - a ** (n + 1)) / (n + 1)
    assert abs(got - ref) <= 1e-11 * max(1.0, abs(ref))


def test_batch_matches_scalar():
    a = np.array([0.0, 1.0, 2.0])
    b = np.array([1.0, 3.0, 2.5])
    est, err = tanh_sinh_batch(np.sin, a, b)
    ref = np.cos(a) - np.cos(b)
    assert np.allclose(est, ref, rtol=1e-13, atol=1e-14)
    assert np.all(err < 1e-10)


def test_batch_validation():
    with pytest.raises(ValueError):
        tanh_sinh_batch(np.sin, [1.0], [0.0])
    with pytest.raises(ValueError):
        tanh_sinh_batch(np.sin, [0.0, 1.0], [1.0])


def test_non_convergence_is_reported():
    with pytest.raises(QuadratureError):
        tanh_sinh_batch(lambda x: np.sin(400 * x), 0.0, 10.0, max_level=4)
    est, err = tanh_sinh_batch(lambda x: np.sin(400 * x), 0.0, 10.0, max_level=4, strict=False)
    assert err[0] > 1e-12


def test_simpson_oracle():
    assert abs(adaptive_simpson(math.exp, 0.0, 1.0, 1e-12) - (math.e - 1)) < 1e-11
