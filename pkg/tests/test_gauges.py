import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from nentire.errors import InvalidParameterError
from nentire.gauges import (Piece, PiecewisePolyGauge, default_laplacian_gauge,
                            default_momentum_gauge, gauge_defect_set, monomial_transform,
                            verify_laplacian_gauge, verify_momentum_gauge)

from oracles import mp_piece_transform

small = st.floats(min_value=-2.0, max_value=2.0)


@st.composite
def gauges(draw):
    lo = draw(st.floats(min_value=-3.0, max_value=0.0))
    width = draw(st.floats(min_value=0.5, max_value=3.0))
    cut = lo + width * draw(st.floats(min_value=0.2, max_value=0.8))
    pieces = []
    for a, b in ((lo, cut), (cut, lo + width)):
        deg = draw(st.integers(0, 4))
        coeffs = tuple(complex(draw(small), draw(small)) for _ in range(deg + 1))
        pieces.append(Piece(a, b, coeffs))
    return PiecewisePolyGauge((lo, lo + width), tuple(pieces))


@settings(max_examples=30, deadline=None)
@given(gauges(), st.complex_numbers(max_magnitude=15.0, allow_nan=False, allow_infinity=False))
def test_fourier_matches_quadrature(g, z):
    ref = sum(mp_piece_transform(p.coeffs, p.lo, p.hi, z) for p in g.pieces)
    got = complex(g.fourier(z))
    assert abs(got - ref) <= 1e-9 * max(1.0, abs(ref))


@pytest.mark.parametrize("m", range(6))
@pytest.mark.parametrize("z", [0.0, 1e-9, 0.3 - 0.1j, 2.5 + 1j, 40.0, -7j])
def test_monomial_transform_both_regimes(m, z):
    ref = mp_piece_transform([0] * m + [1], -0.7, 1.3, z)
    got = complex(monomial_transform(m, -0.7, 1.3, z))
    assert abs(got - ref) <= 1e-11 * max(1.0, abs(ref))


def test_default_momentum_gauge_identity():
    for a in (0.5, 1.0, math.pi):
        mu0, mu1 = default_momentum_gauge(a)
        chk = verify_momentum_gauge(a, mu0, mu1)
        assert chk and chk.max_residual < 1e-12
        band = np.linspace(-20, 20, 41)[:, None] + 1j * np.linspace(-2, 2, 5)[None, :]
        assert verify_momentum_gauge(a, mu0, mu1, band.ravel(), tol=1e-10)


def test_default_laplacian_gauge_identity():
    for a in (0.5, 1.0, math.pi):
        mu0, mu1 = default_laplacian_gauge(a)
        chk = verify_laplacian_gauge(a, mu0, mu1)
        assert chk and chk.max_residual < 1e-12


def test_negative_controls():
    a = math.pi
    mu0, mu1 = default_momentum_gauge(a)
    assert verify_momentum_gauge(a, mu0, mu1.scaled(0)).max_residual > 0.1
    assert verify_momentum_gauge(a, mu0, mu1.scaled(2)).max_residual > 0.1
    l0, l1 = default_laplacian_gauge(a)
    assert verify_laplacian_gauge(a, l0, l1.scaled(0)).max_residual > 0.1
    assert verify_laplacian_gauge(a, l0, l1.scaled(2)).max_residual > 0.1


def test_interval_mismatch_rejected():
    mu0, mu1 = default_momentum_gauge(1.0)
    with pytest.raises(InvalidParameterError):
        verify_momentum_gauge(2.0, mu0, mu1)


def test_point_values_and_sides():
    mu0, mu1 = default_momentum_gauge(2.0)
    assert mu1(0.0, "right") == pytest.approx(0.5j)
    assert mu1(0.0, "left") == pytest.approx(-0.5j)
    assert mu1(-2.0) == pytest.approx(0.0)
    assert mu0(1.0) == pytest.approx(0.25)


def test_validation():
    with pytest.raises(InvalidParameterError):
        PiecewisePolyGauge((0.0, 1.0), (Piece(0.0, 0.5, (1,)),))
    with pytest.raises(InvalidParameterError):
        PiecewisePolyGauge((0.0, 1.0), (Piece(0.0, 1.0, (1, 1, 1, 1, 1, 1)),))
    with pytest.raises(InvalidParameterError):
        PiecewisePolyGauge((1.0, 0.0), (Piece(1.0, 0.0, (1,)),))
    with pytest.raises(InvalidParameterError):
        PiecewisePolyGauge.from_dict({"interval": [0, 1], "pieces": [{"sub": [0, 1]}]})


@settings(max_examples=30, deadline=None)
@given(gauges(), st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False))
def test_round_trip_and_linearity(g, c):
    assert PiecewisePolyGauge.from_dict(g.to_dict()) == g
    z = np.array([0.5, -3.0 + 1j])
    np.testing.assert_allclose(g.scaled(c).fourier(z), c * g.fourier(z), atol=1e-12)


def test_defect_sets():
    mu0, mu1 = default_momentum_gauge(1.0)
    # the identity holds, so nothing vanishes
    assert gauge_defect_set("momentum", [mu0, mu1], (-10, 10, -2, 2), density=200) == []
    # mu_0 alone: F mu_0 = sin(z)/z vanishes at the nonzero multiples of pi
    roots = gauge_defect_set("momentum", [mu0], (-10, 10, -1, 1), density=200)
    got = np.sort([r.z.real for r in roots if r.converged])
    np.testing.assert_allclose(got, np.pi * np.array([-3, -2, -1, 1, 2, 3]), atol=1e-10)
    assert all(abs(r.z.imag) < 1e-10 for r in roots)
    l0, _ = default_laplacian_gauge(math.pi)
    roots = gauge_defect_set("laplacian", [l0], (0.5, 10.5, -0.5, 0.5), density=200)
    got = np.sort([r.z.real for r in roots if r.converged])
    np.testing.assert_allclose(got, np.arange(1, 11) ** 2, atol=1e-8)


def test_defect_unknown_model():
    mu0, _ = default_momentum_gauge(1.0)
    with pytest.raises(InvalidParameterError):
        gauge_defect_set("harmonic", [mu0], (-1, 1, -1, 1))


@st.composite
def symmetric_gauges(draw):
    a = draw(st.floats(min_value=0.5, max_value=3.0))
    cut = a * draw(st.floats(min_value=-0.8, max_value=0.8))
    pieces = []
    for lo, hi in ((-a, cut), (cut, a)):
        deg = draw(st.integers(0, 4))
        coeffs = tuple(complex(draw(small), draw(small)) for _ in range(deg + 1))
        # each piece must carry mass, so the support is the whole interval
        assume(max(abs(c) for c in coeffs) > 0.1)
        pieces.append(Piece(lo, hi, coeffs))
    return a, PiecewisePolyGauge((-a, a), tuple(pieces))


@settings(max_examples=5, deadline=None)
@given(symmetric_gauges())
def test_single_gauge_has_defects_near_origin(drawn):
    # a lone transform of a measure on [-a, a] cannot be zero free; a small disk of
    # radius just over pi/a can miss every zero, so search a box of half width 4 pi/a
    a, g = drawn
    r = 4 * math.pi / a
    roots = gauge_defect_set("momentum", [g], (-r, r, -r, r), density=200)
    assert any(rt.converged for rt in roots)


@settings(max_examples=5, deadline=None)
@given(st.floats(min_value=0.3, max_value=4.0))
def test_verified_gauges_have_no_defects(a):
    mu0, mu1 = default_momentum_gauge(a)
    assert verify_momentum_gauge(a, mu0, mu1, tol=1e-10)
    assert gauge_defect_set("momentum", [mu0, mu1], (-10, 10, -2, 2), density=200) == []


@settings(max_examples=10, deadline=None)
@given(st.floats(min_value=0.3, max_value=4.0), st.sampled_from([0.0, 0.5, 2.0]))
def test_residual_stable_under_grid_refinement(a, s):
    mu0, mu1 = default_momentum_gauge(a)
    mu1 = mu1.scaled(s)
    coarse = np.linspace(-10, 10, 101)
    fine = np.linspace(-10, 10, 1001)    # contains the coarse points
    rc = verify_momentum_gauge(a, mu0, mu1, coarse).max_residual
    rf = verify_momentum_gauge(a, mu0, mu1, fine).max_residual
    assert rf >= rc - 1e-14
    if s == 1.0 or rc < 1e-12:
        assert rf < 1e-12
    else:
        assert rf <= 1.5 * rc
