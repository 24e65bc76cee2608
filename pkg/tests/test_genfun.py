import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqwave import genfun as gf


def taylor_by_contour(f, n_terms=6, radius=0.2, n=256):
    """Taylor coefficients of ``f`` at 0 from the trapezoidal rule on ``|z| = radius``."""
    z = radius * np.exp(2j * np.pi * np.arange(n) / n)
    c = np.fft.fft(f(z)) / n
    return (c[:n_terms] / radius ** np.arange(n_terms)).real


def delta_of_exp_direct(g):
    P, Q = g.zeta_coefficients()
    return lambda z: np.polyval(P[::-1], np.exp(-z)) / np.polyval(Q[::-1], np.exp(-z))


@pytest.mark.parametrize("name", ["bdf2", "tr", "ttr"])
def test_expansion_matches_contour_oracle(name):
    g = gf.from_name(name)
    rep = gf.consistency_expansion(g)
    c = taylor_by_contour(delta_of_exp_direct(g))
    np.testing.assert_allclose([rep.e1, rep.e2, rep.e3, rep.e4], c[1:5], atol=1e-12)
    assert abs(c[0]) < 1e-13


def test_known_expansions():
    b = gf.consistency_expansion(gf.bdf2())
    t = gf.consistency_expansion(gf.trapezoidal())
    assert (b.e1, b.e2) == pytest.approx((1.0, 0.0), abs=1e-15)
    assert b.e3 == pytest.approx(-1 / 3, abs=1e-14) and b.e4 == pytest.approx(0.25, abs=1e-14)
    assert t.e3 == pytest.approx(-1 / 12, abs=1e-14) and t.e4 == pytest.approx(0.0, abs=1e-14)


def test_ttr_expansion_is_affine_in_c2():
    rep = gf.consistency_expansion(gf.ttr((0.5,)))
    assert rep.e3 == pytest.approx(-1 / 3 + 0.5 / 4, abs=1e-15)


def test_zeta_coefficients_reproduce_call(rng):
    for name in ("bdf2", "tr", "ttr"):
        g = gf.from_name(name)
        P, Q = g.zeta_coefficients()
        z = 0.9 * np.exp(2j * np.pi * rng.random(20))
        np.testing.assert_allclose(g(z), np.polyval(P[::-1], z) / np.polyval(Q[::-1], z), rtol=1e-13)


def test_of_exp_accurate_near_zero():
    g = gf.bdf2()
    z = 1e-9 * (1 + 1j)
    assert g.of_exp(z) == pytest.approx(z + 0.0 * z**2 - z**3 / 3, rel=1e-12)


def test_tr_pole():
    with pytest.raises(gf.PoleError):
        gf.trapezoidal()(-1.0)


def test_constructor_validation():
    with pytest.raises(ValueError):
        gf.GeneratingFunction(gf.Kind.TTR)
    with pytest.raises(ValueError):
        gf.GeneratingFunction(gf.Kind.BDF2, (0.5,))
    with pytest.raises(ValueError):
        gf.ttr((1.5,))
    with pytest.raises(ValueError):
        gf.from_name("rk4")


def test_a_stability_of_builtins():
    for g in (gf.bdf2(), gf.trapezoidal(), gf.ttr()):
        assert gf.check_a_stability(g) >= -gf.A_STABILITY_TOL


def test_unstable_coefficients_detected():
    # c_2 = 1 overshoots the A-stable range
    g = gf.ttr((1.0, 0.0, 0.0))
    assert gf.check_a_stability(g) < 0


@settings(max_examples=60, deadline=None)
@given(
    r=st.floats(0.0, 0.999),
    theta=st.floats(0.0, 2 * math.pi),
    name=st.sampled_from(["bdf2", "tr", "ttr"]),
)
def test_positive_real_part_inside_disk(r, theta, name):
    # harmonic real part attains its minimum on the boundary, which is >= 0
    g = gf.from_name(name)
    assert g(r * np.exp(1j * theta)).real >= -1e-12


@settings(max_examples=40, deadline=None)
@given(zr=st.floats(-0.9, 0.9), zi=st.floats(-0.9, 0.9))
def test_real_symbol_conjugate_symmetry(zr, zi):
    for g in (gf.bdf2(), gf.trapezoidal(), gf.ttr()):
        z = complex(zr, zi)
        assert g(z.conjugate()) == pytest.approx(g(z).conjugate(), abs=1e-14)


def test_design_ttr_feasible_and_close_to_published():
    d = gf.design_ttr(4, 50_000)
    assert d.feasible and d.min_re >= -gf.A_STABILITY_TOL
    assert 1 / d.report.error_constant == pytest.approx(9.10, abs=0.02)
    assert d.delta.ttr_coeffs[0] == pytest.approx(gf.PUBLISHED_TTR_COEFFS[0], abs=2e-3)


def test_design_ttr_fixed_all_coefficients():
    d = gf.design_ttr(4, 5000, fixed={2: 1.0, 3: 1.0, 4: 1.0})
    assert not d.feasible


def test_design_ttr_rejects_bad_input():
    with pytest.raises(ValueError):
        gf.design_ttr(1)
    with pytest.raises(ValueError):
        gf.design_ttr(3, fixed={5: 0.1})


def test_stability_boundary_shape():
    z = gf.stability_region_boundary(gf.trapezoidal(), 64)
    assert len(z) == 63
    np.testing.assert_allclose(z.real, 0.0, atol=1e-13)  # TR maps the circle to the imaginary axis
    assert len(gf.stability_region_boundary(gf.bdf2(), 64)) == 64
    with pytest.raises(ValueError):
        gf.stability_region_boundary(gf.bdf2(), 2)
