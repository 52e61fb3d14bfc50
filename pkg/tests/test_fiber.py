from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inhomfpu.errors import DomainError, IncompleteSchemeError, PreconditionError
from inhomfpu.fiber import (
    U1, ResonanceRatio, TargetSpectrum, classify_resonance, eta2_from_u, fiber123, fiber_classify,
    region_tests, solve_fiber_at, spherical_coords, target_spectrum, u_from_eta2, xi_eta,
)
from inhomfpu.lattice import spectrum
from inhomfpu.validate import EXPECTED_FIBERS
from oracles import fiber_curve_components, rational_boundary

LAM = np.array([9 / 14, 2 / 7, 1 / 14])


@pytest.mark.parametrize("text,expected", [("1:2:3", (1, 2, 3)), ("3:1:2", (1, 2, 3)),
                                           ("2:4:6", (1, 2, 3)), ("2:3:6", (2, 3, 6))])
def test_ratio_parsing(text, expected):
    r = ResonanceRatio.parse(text)
    assert (r.n1, r.n2, r.n3) == expected


@pytest.mark.parametrize("text", ["1:2", "a:b:c", "0:1:2", "-1:2:3"])
def test_ratio_parsing_rejects(text):
    with pytest.raises((ValueError, DomainError)):
        ResonanceRatio.parse(text)


def test_exact_target_normalization():
    t = target_spectrum(ResonanceRatio.parse("1:2:3"), exact=True)
    assert t.values == (Fraction(9, 14), Fraction(2, 7), Fraction(1, 14))
    assert sum(t.values) == 1


@given(st.floats(0.0, 0.88))
@settings(max_examples=80, deadline=None)
def test_fiber123_realizes_target(u):
    p = fiber123(u)
    assert np.all(p.a > 0)
    assert np.isclose(2 * p.a.sum(), 1, atol=1e-14)
    assert np.allclose(spectrum(p.a).positive, LAM, atol=1e-10)


@given(st.floats(0.0, 0.88), st.floats(0.1, 10))
@settings(max_examples=30, deadline=None)
def test_fiber123_scaling(u, s):
    assert np.allclose(fiber123(u, scale=s).a, s * fiber123(u).a, rtol=1e-13)


@given(st.floats(-0.06, 0.06))
def test_u_eta2_roundtrip(u):
    assert u_from_eta2(eta2_from_u(u)) == pytest.approx(u, abs=1e-12)


def test_branch_endpoint_is_u1():
    assert U1 == pytest.approx(0.887732, abs=1e-6)
    assert np.min(fiber123(U1 - 1e-12).a) == pytest.approx(0, abs=1e-12)
    with pytest.raises(DomainError):
        fiber123(U1)


def test_region_polynomial_matches_oracle():
    rng = np.random.default_rng(1)
    for xi, eta in rng.uniform(0.001, 0.4, size=(50, 2)):
        assert region_tests(xi, eta).T == pytest.approx(rational_boundary(xi, eta), abs=1e-15)


def test_region_tests_exact():
    r = region_tests(Fraction(1, 27), Fraction(1, 3))
    assert r.T == 0
    with pytest.raises(DomainError):
        region_tests(0.0, 0.1)


@given(st.lists(st.floats(0.01, 1), min_size=3, max_size=3))
@settings(max_examples=50)
def test_every_triple_lies_in_image(vals):
    t = TargetSpectrum.from_eigenvalues(vals)
    xi, eta = xi_eta(t)
    assert region_tests(xi, eta, atol=1e-12).in_image


def test_exceptional_line_raises():
    xi = 0.02
    with pytest.raises(IncompleteSchemeError):
        solve_fiber_at(xi, 4 * xi + 3 / 16, 0.0)


@pytest.mark.parametrize("ratio,expected", sorted(EXPECTED_FIBERS.items()))
def test_classification_table(ratio, expected):
    c = classify_resonance(ratio)
    assert (c.kind, c.count) == expected


@pytest.mark.parametrize("ratio", ["2:3:4", "2:3:6"])
def test_compact_counts_against_contour_oracle(ratio):
    t = target_spectrum(ResonanceRatio.parse(ratio))
    xi, eta = xi_eta(t)
    assert fiber_curve_components(xi, eta) == classify_resonance(ratio).count


def test_compact_branches_close_up():
    c = classify_resonance("2:3:4")
    assert c.branches and all(b.lo_closed and b.hi_closed for b in c.branches)
    for b in c.branches:
        for p in b.sample(20):
            assert np.allclose(np.sort(spectrum(p.a).positive), np.sort(target_spectrum(
                ResonanceRatio.parse("2:3:4")).values), atol=1e-9)


def test_points_have_stabilizers():
    c = classify_resonance("1:1:2")
    assert c.kind == "FinitePoints"
    assert c.count == 4 and len(c.points) == 1
    assert c.points[0].symmetry_stabilizer == "e,(13)"


def test_fiber_classify_empty_target():
    assert fiber_classify(0.033, 0.2).kind == "Empty"


def test_spherical_coordinates():
    sc = spherical_coords(fiber123(0.3).a)
    assert np.isfinite([sc.rho, sc.psi, sc.phi]).all()
    with pytest.raises(PreconditionError):
        spherical_coords([0.1, 0.1, 0.1, 0.1])
    with pytest.raises(DomainError):
        spherical_coords([0.125] * 4)
