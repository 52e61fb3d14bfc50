import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inhomfpu.errors import DegenerateSpectrumError, InconsistentTransformError
from inhomfpu.fiber import fiber123
from inhomfpu.lattice import build_coupling
from inhomfpu.transform import (
    LAMBDA_123, MONOMIALS, CubicCoefficients, cubic_from_table, cubic_from_transform, cubic_tensor,
    transform_closed_form, transform_numeric, transform_pair,
)

us = st.floats(0.0, 0.85)
C4 = build_coupling(4)


@given(us, st.booleans())
@settings(max_examples=60, deadline=None)
def test_transform_identities(u, numeric):
    tp = transform_pair(u, numeric=numeric)
    A = np.diag(tp.a)
    assert np.allclose(tp.K.T @ A @ tp.K, np.eye(4), atol=1e-10)
    assert np.allclose(tp.L.T @ C4 @ tp.L, np.diag(LAMBDA_123), atol=1e-10)
    assert np.allclose(tp.L, np.sqrt(A) @ np.sqrt(A) @ tp.K, atol=1e-12)


@given(us)
@settings(max_examples=40, deadline=None)
def test_closed_form_matches_numeric(u):
    assert np.allclose(transform_closed_form(u), transform_pair(u, numeric=True).L, atol=1e-10)


def test_zero_mode_column_is_constant():
    L = transform_closed_form(0.4)
    assert np.allclose(L[:, 3], L[0, 3])


@given(us, st.lists(st.floats(-1, 1), min_size=4, max_size=4),
       st.lists(st.floats(-1, 1), min_size=4, max_size=4))
@settings(max_examples=40, deadline=None)
def test_coordinate_roundtrip(u, q, v):
    tp = transform_pair(u)
    x, y = tp.modal_from_chain(q, v)
    q2, v2 = tp.chain_from_modal(x, y)
    assert np.allclose(q2, q, atol=1e-12) and np.allclose(v2, v, atol=1e-12)


def test_numeric_rejects_degenerate_spectrum():
    with pytest.raises(DegenerateSpectrumError):
        transform_numeric([0.25, 0.25, 0.25, 0.25])


def test_numeric_follows_reference_signs():
    ref = transform_closed_form(0.3)
    tp = transform_numeric(fiber123(0.3).a, reference=ref)
    assert np.allclose(tp.L, ref, atol=1e-10)


@given(us)
@settings(max_examples=50, deadline=None)
def test_cubic_cross_oracle(u):
    a = cubic_from_table(u).as_array()
    b = cubic_from_transform(transform_pair(u, numeric=True).L).as_array()
    assert np.allclose(a, b, atol=1e-10)


def test_cubic_tensor_is_symmetric():
    T = cubic_tensor(transform_closed_form(0.2))
    for perm in [(0, 2, 1), (1, 0, 2), (2, 1, 0)]:
        assert np.allclose(T, T.transpose(perm))


def test_inconsistent_transform_detected():
    L = transform_closed_form(0.2).copy()
    L[:, 3] += np.array([0.1, 0.0, 0.0, 0.0])
    with pytest.raises(InconsistentTransformError):
        cubic_from_transform(L)


@given(us, st.floats(0.1, 3.0))
@settings(max_examples=20, deadline=None)
def test_cubic_linear_in_alpha(u, alpha):
    assert np.allclose(cubic_from_table(u, alpha).as_array(), alpha * cubic_from_table(u).as_array())


def test_case0_vanishing_coefficients():
    d = cubic_from_table(0.0)
    assert d.d9 == pytest.approx(0, abs=1e-15)
    assert d.q == pytest.approx(0, abs=1e-15)


@given(us, st.lists(st.floats(-1, 1), min_size=3, max_size=3))
@settings(max_examples=40, deadline=None)
def test_gradient_matches_finite_difference(u, x):
    d = cubic_from_table(u)
    x = np.array(x)
    h = 1e-6
    fd = [(d.potential(x + h * e) - d.potential(x - h * e)) / (2 * h) for e in np.eye(3)]
    assert np.allclose(d.gradient(x), fd, atol=1e-8)


def test_potential_equals_chain_cubic():
    # H3 in modal coordinates equals (1/3) sum of cubed differences of the chain
    tp = transform_pair(0.5)
    d = cubic_from_table(0.5)
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = np.append(rng.normal(size=3), 0.0)
        q, _ = tp.chain_from_modal(x, np.zeros(4))
        diff = np.roll(q, -1) - q
        assert d.potential(x[:3]) == pytest.approx((diff**3).sum() / 3, abs=1e-12)


def test_monomials_roundtrip():
    arr = np.arange(1, 11, dtype=float)
    assert np.array_equal(CubicCoefficients.from_array(arr).as_array(), arr)
    assert len(MONOMIALS) == 10
