import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqwave import genfun as gf
from cqwave.cq import (
    ContourParams,
    ContourResidueWarning,
    HerglotzTestParams,
    WeightSequence,
    apply_history,
    block_weights,
    contour_frequencies,
    convolve,
    discrete_derivative,
    scalar_weights,
)


def series_weights_resolvent(g, dt, a, n):
    """Taylor coefficients of ``1 / (delta(zeta) / dt + a)`` by exact series division."""
    P, Q = g.zeta_coefficients()
    # (P / dt + a Q) * y = Q
    den = np.zeros(n)
    num = np.zeros(n)
    m = len(P)
    den[: min(m, n)] += P[:n] / dt
    den[: min(len(Q), n)] += a * Q[:n]
    num[: min(len(Q), n)] = Q[:n]
    y = np.zeros(n)
    for k in range(n):
        y[k] = (num[k] - np.dot(den[1 : k + 1][::-1], y[:k])) / den[0]
    return y


@pytest.mark.parametrize("name", ["bdf2", "tr", "ttr"])
def test_resolvent_weights_match_series_oracle(name):
    g = gf.from_name(name)
    p = ContourParams(64, 0.1)
    w = scalar_weights(lambda s: 1.0 / (s + 2.0), g, p)
    ref = series_weights_resolvent(g, 0.1, 2.0, 65)
    np.testing.assert_allclose(w.weights, ref, atol=100 * p.contour_error)


def test_bdf2_derivative_weights():
    p = ContourParams(128, 0.5)
    w = scalar_weights(lambda s: s, gf.bdf2(), p)
    ref = np.zeros(129)
    ref[:3] = np.array([1.5, -2.0, 0.5]) / 0.5
    assert np.abs(w.weights - ref).max() <= 10 * p.contour_error / 0.5


def test_contour_params_validation():
    with pytest.raises(ValueError):
        ContourParams(0, 1.0)
    with pytest.raises(ValueError):
        ContourParams(8, -1.0)
    with pytest.raises(ValueError):
        ContourParams(8, 1.0, lam=1e-3)  # below the roundoff-balanced radius
    assert ContourParams(8, 1.0, lam=0.5).lam == 0.5
    assert HerglotzTestParams(2.0, 0.1).rho == pytest.approx(np.exp(-0.2))
    with pytest.raises(ValueError):
        HerglotzTestParams(0.0, 0.1)


def test_contour_frequencies_conjugate_pairs():
    p = ContourParams(9, 0.3)
    s = contour_frequencies(gf.bdf2(), p)
    np.testing.assert_allclose(s[1:], np.conj(s[1:][::-1]), rtol=1e-13)
    assert np.all(s.real > 0)


def test_non_finite_kernel_raises():
    with pytest.raises(FloatingPointError):
        scalar_weights(lambda s: np.full(s.shape, np.nan), gf.bdf2(), ContourParams(8, 1.0))


def test_non_real_kernel_warns():
    with pytest.warns(ContourResidueWarning):
        scalar_weights(lambda s: 1j * s, gf.bdf2(), ContourParams(16, 1.0))


def test_scalar_only_kernel_is_vectorized_by_fallback():
    w = scalar_weights(lambda s: complex(s) ** 2, gf.bdf2(), ContourParams(16, 1.0))
    ref = scalar_weights(lambda s: s**2, gf.bdf2(), ContourParams(16, 1.0))
    np.testing.assert_allclose(w.weights, ref.weights, atol=1e-7)


@pytest.mark.parametrize("parallel", [False, 2])
def test_block_weights_match_scalar(parallel):
    g = gf.ttr()
    p = ContourParams(33, 0.2)
    a = np.array([1.0, 3.0])

    def assembler(s):
        return np.array([[1 / (s + a[0]), s], [0.0, 1 / (s + a[1])]])

    calls = []
    wb = block_weights(lambda s: calls.append(s) or assembler(s), g, p, parallel=parallel)
    assert len(calls) == (p.N + 1) // 2 + 1
    w0 = scalar_weights(lambda s: 1 / (s + a[0]), g, p)
    w1 = scalar_weights(lambda s: s, g, p)
    np.testing.assert_allclose(wb.weights[:, 0, 0], w0.weights, atol=1e-9)
    np.testing.assert_allclose(wb.weights[:, 0, 1], w1.weights, atol=1e-7)
    np.testing.assert_allclose(wb.weights[:, 1, 0], 0.0, atol=1e-9)
    assert wb.is_block and wb.N == 33


@pytest.mark.parametrize("name", ["bdf2", "tr", "ttr"])
def test_first_block_weight_is_kernel_at_delta0(name):
    # omega_0 is the Taylor coefficient at zeta = 0, i.e. the kernel at s = delta(0) / dt
    from cqwave.bem import BoundarySpaces, CalderonAssembler

    g = gf.from_name(name)
    asm = CalderonAssembler(BoundarySpaces.circle(1.0, 12))
    p = ContourParams(40, 0.1)
    w = block_weights(asm, g, p)
    direct = asm(complex(g(0.0)) / p.dt).real
    assert np.abs(w.weights[0] - direct).max() <= 1e-8 * np.abs(direct).max()


def test_block_weights_shape_errors():
    p = ContourParams(8, 1.0)
    with pytest.raises(ValueError):
        block_weights(lambda s: np.ones(3), gf.bdf2(), p)
    with pytest.raises(FloatingPointError):
        block_weights(lambda s: np.full((2, 2), np.inf), gf.bdf2(), p)


def test_apply_history_against_loop(rng):
    w = WeightSequence(rng.standard_normal((7, 2, 3)))
    x = rng.standard_normal((7, 3))
    for n in range(7):
        ref = sum((w.weights[n - j] @ x[j] for j in range(n)), np.zeros(2))
        np.testing.assert_allclose(apply_history(w, x, n), ref, atol=1e-14)
    with pytest.raises(IndexError):
        apply_history(w, x, 7)
    with pytest.raises(IndexError):
        apply_history(w, x[:2], 4)


@settings(max_examples=30, deadline=None)
@given(
    x=st.lists(st.floats(-10, 10), min_size=1, max_size=12),
    k=st.integers(0, 11),
)
def test_convolution_is_causal(x, k):
    w = WeightSequence(np.linspace(1.0, 0.1, 12))
    x = np.array(x)
    y1 = convolve(w, x)
    x2 = x.copy()
    if k < len(x):
        x2[k:] += 1.0
    y2 = convolve(w, x2)
    np.testing.assert_allclose(y1[: min(k, len(x))], y2[: min(k, len(x))])


@pytest.mark.parametrize("name", ["bdf2", "tr", "ttr"])
def test_discrete_derivative_matches_weights(name, rng):
    g = gf.from_name(name)
    p = ContourParams(40, 0.25)
    x = rng.standard_normal(41)
    for power, K in ((1, lambda s: s), (-1, lambda s: 1 / s)):
        w = scalar_weights(K, g, p)
        np.testing.assert_allclose(discrete_derivative(g, p.dt, x, power), convolve(w, x), atol=1e-6)
    with pytest.raises(ValueError):
        discrete_derivative(g, 0.1, x, 2)


def test_bdf2_derivative_of_quadratic_is_exact():
    dt = 0.1
    t = dt * np.arange(20)
    x = t**2  # vanishes with its derivative at t = 0, so the causal extension is smooth
    d = discrete_derivative(gf.bdf2(), dt, x, 1)
    np.testing.assert_allclose(d[2:], 2 * t[2:], atol=1e-12)
