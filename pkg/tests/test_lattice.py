from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inhomfpu.errors import DomainError, InvalidDimensionError, PreconditionError, SingularFormulaError
from inhomfpu.lattice import (
    InverseMasses, build_coupling, char_poly_identities, dihedral_elements, dihedral_orbit,
    eigenvector_closed_form, momentum, spectrum, symmetric_eigen,
)
from oracles import circulant_spectrum

positive = st.floats(0.05, 5.0, allow_nan=False)
mass_vectors = st.integers(3, 8).flatmap(lambda n: st.lists(positive, min_size=n, max_size=n))


@pytest.mark.parametrize("n", [3, 4, 5, 8, 13])
def test_coupling_is_cyclic_laplacian(n):
    C = build_coupling(n)
    assert np.allclose(C, C.T)
    assert np.allclose(C.sum(axis=1), 0)
    assert np.all(np.diag(C) == 2)


@pytest.mark.parametrize("n", [3, 4, 6, 9])
def test_equal_masses_give_circulant_spectrum(n):
    s = spectrum(np.ones(n))
    assert np.allclose(np.sort(s.eigenvalues)[::-1], circulant_spectrum(n), atol=1e-12)
    assert s.eigenvalues[-1] == 0.0


def test_example_four_unit_masses():
    assert np.allclose(spectrum([1, 1, 1, 1]).eigenvalues, [4, 2, 2, 0], atol=1e-13)


@given(mass_vectors)
@settings(max_examples=60, deadline=None)
def test_eigenpairs_and_trace(a):
    a = np.array(a)
    s = spectrum(a)
    M = np.diag(a) @ build_coupling(a.size)
    for lam, v in zip(s.eigenvalues, s.eigenvectors.T):
        assert np.allclose(M @ v, lam * v, atol=1e-10 * max(1, lam))
    assert np.isclose(s.eigenvalues.sum(), 2 * a.sum(), rtol=1e-12)
    assert np.all(s.positive > 0)


@given(mass_vectors)
@settings(max_examples=60, deadline=None)
def test_symmetric_functions_match_identities(a):
    p1, p2 = char_poly_identities(a)
    lam = spectrum(a).positive
    e2 = (lam.sum() ** 2 - (lam**2).sum()) / 2
    assert np.isclose(p1, lam.sum(), rtol=1e-11)
    assert np.isclose(p2, e2, rtol=1e-10)


def test_identities_exact_with_fractions():
    p1, p2 = char_poly_identities([Fraction(1, 4)] * 4)
    assert (p1, p2) == (2, Fraction(3 * 4 + 4 * 2, 16))


@given(st.integers(2, 12).map(lambda k: k * 2))
@settings(max_examples=10, deadline=None)
def test_jacobi_matches_lapack(n):
    rng = np.random.default_rng(n)
    X = rng.normal(size=(n, n))
    M = X + X.T
    res = symmetric_eigen(M)
    assert np.allclose(np.sort(res.eigenvalues), np.linalg.eigvalsh(M), atol=1e-11)
    assert np.allclose(res.U.T @ res.U, np.eye(n), atol=1e-12)


@given(st.lists(positive, min_size=4, max_size=4))
@settings(max_examples=50, deadline=None)
def test_closed_form_eigenvector(a):
    a = np.array(a)
    M = np.diag(a) @ build_coupling(4)
    for lam in spectrum(a).positive:
        try:
            v = eigenvector_closed_form(a, lam)
        except SingularFormulaError:
            continue
        if np.linalg.norm(v) < 1e-6 or not np.all(np.isfinite(v)):
            continue
        v = v / np.linalg.norm(v)
        assert np.linalg.norm(M @ v - lam * v) < 1e-8 * max(1.0, np.abs(v).max() / np.abs(v).min())


def test_closed_form_singular():
    with pytest.raises(SingularFormulaError):
        eigenvector_closed_form([0.25] * 4, 0.5)


def test_momentum_of_uniform_translation():
    a = np.array([0.5, 0.25, 0.2, 1.0])
    assert momentum(a, np.ones(4)) == pytest.approx((1 / a).sum())


@pytest.mark.parametrize("bad,exc", [([1, 1], InvalidDimensionError), ([1, -1, 1], DomainError),
                                     ([1, np.nan, 1], DomainError)])
def test_invalid_inverse_masses(bad, exc):
    with pytest.raises(exc):
        InverseMasses(bad)


def test_degenerate_zero_mode_rejected():
    # an absurd mass ratio makes the smallest positive eigenvalue look like zero
    with pytest.raises(PreconditionError):
        spectrum([1.0, 1e-13, 1e-13, 1.0])


def test_dihedral_group_structure():
    elems = dihedral_elements(4)
    assert len(elems) == 8
    assert elems[0] == ("e", (0, 1, 2, 3))
    assert len({p for _, p in elems}) == 8
    assert len(dihedral_orbit([1, 2, 3, 4])) == 8
    assert len(dihedral_orbit([1, 2, 1, 2])) == 2


@given(st.lists(positive, min_size=4, max_size=4))
@settings(max_examples=40, deadline=None)
def test_spectrum_is_dihedral_invariant(a):
    ref = spectrum(a).eigenvalues
    for img in dihedral_orbit(a):
        assert np.allclose(spectrum(img).eigenvalues, ref, rtol=1e-10, atol=1e-12)
