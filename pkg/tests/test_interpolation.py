import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vpsums.interpolation import (
    DiscreteSpectrum,
    deviation_rho_tilde,
    discrete_coeffs,
    interp_nodes,
    interp_partial_average,
    interp_polynomial,
    interp_vp_of,
    interp_vp_sum,
    rho_tilde_polynomial,
)
from vpsums.psi_calculus import make_psi, psi_integral
from vpsums.trig_core import (
    NormIndex,
    TrigPolynomial,
    UniformGrid,
    cos_norm,
    deviation_rho,
    partial_sum,
    vp_sum,
)


def random_poly(rng, order):
    return TrigPolynomial(rng.standard_normal(order + 1), rng.standard_normal(order))


def coeff_diff(p, q):
    K = max(p.order, q.order)
    d = p.padded(K) - q.padded(K)
    return float(np.max(np.abs(np.concatenate([d.a, d.b]))))


def spectrum_of(f, n):
    return discrete_coeffs(f(interp_nodes(n)), n)


# nodes


def test_nodes_examples():
    assert np.array_equal(interp_nodes(1), [0.0])
    assert np.allclose(interp_nodes(2), [0.0, 2 * math.pi / 3, 4 * math.pi / 3], atol=1e-15)
    x = interp_nodes(3)
    assert x.size == 5
    assert np.allclose(np.diff(x), 2 * math.pi / 5)


def test_nodes_reject_zero():
    with pytest.raises(ValueError):
        interp_nodes(0)


# discrete coefficients


def test_discrete_cos2x():
    d = spectrum_of(lambda x: np.cos(2 * x), 3)
    assert np.allclose(d.a[:3], [0, 0, 1], atol=1e-13)
    assert np.allclose(d.b[:2], 0, atol=1e-13)
    # the k = n edge entry sees 3 = -2 mod 5 and repeats the cos 2x coefficient
    assert d.a[3] == pytest.approx(1.0, abs=1e-13)
    assert abs(d.b[2]) <= 1e-13


def test_discrete_full_aliasing():
    d = spectrum_of(lambda x: np.cos(5 * x), 3)
    assert d.a[0] == pytest.approx(2.0, abs=1e-13)
    assert np.allclose(d.a[1:], 0, atol=1e-13)


def test_discrete_sine_alias_flips_sign():
    d = spectrum_of(lambda x: np.sin(3 * x), 3)
    assert d.b[1] == pytest.approx(-1.0, abs=1e-13)
    assert np.allclose(d.a, 0, atol=1e-13)
    assert abs(d.b[0]) <= 1e-13


def test_discrete_wrong_sample_count():
    with pytest.raises(ValueError, match="expected 5 samples"):
        discrete_coeffs(np.zeros(4), 3)


def test_spectrum_shape_checked():
    with pytest.raises(ValueError):
        DiscreteSpectrum(3, np.zeros(3), np.zeros(3))


@pytest.mark.parametrize("n", range(1, 9))
def test_aliasing_rule_exhaustive(n):
    N = 2 * n - 1
    for q in range(n, 41):
        r = q % N
        qc, sgn = (r, 1.0) if r <= n - 1 else (N - r, -1.0)
        dc = spectrum_of(lambda x: np.cos(q * x), n)
        ec = spectrum_of(lambda x: np.cos(qc * x), n)
        assert np.max(np.abs(dc.a[:n] - ec.a[:n])) <= 1e-12
        assert np.max(np.abs(dc.b[: n - 1] - ec.b[: n - 1]), initial=0.0) <= 1e-12
        ds = spectrum_of(lambda x: np.sin(q * x), n)
        es = spectrum_of(lambda x: sgn * np.sin(qc * x), n)
        assert np.max(np.abs(ds.a[:n] - es.a[:n])) <= 1e-12
        assert np.max(np.abs(ds.b[: n - 1] - es.b[: n - 1]), initial=0.0) <= 1e-12


# interpolation polynomial


def test_interp_recovers_cos2x():
    p = interp_polynomial(spectrum_of(lambda x: np.cos(2 * x), 3))
    assert coeff_diff(p, TrigPolynomial.cosine(2)) <= 1e-13


@given(st.integers(1, 24), st.integers(0, 2**32 - 1))
def test_exact_for_low_order(n, seed):
    f = random_poly(np.random.default_rng(seed), n - 1)
    assert coeff_diff(interp_polynomial(spectrum_of(f, n)), f) <= 1e-12


@given(st.integers(1, 24), st.integers(0, 2**32 - 1))
def test_interpolates_at_nodes(n, seed):
    rng = np.random.default_rng(seed)
    amp, freq, shift = rng.uniform(0.5, 2.0, 3)

    def f(x):
        return amp * np.exp(np.cos(freq * np.sin(x - shift))) + np.abs(np.sin(x))

    x = interp_nodes(n)
    p = interp_polynomial(spectrum_of(f, n))
    assert np.max(np.abs(p(x) - f(x))) <= 1e-10


def test_interp_error_of_smooth_function_bounded_by_psi_tail():
    # f = sum_k psi(k) cos(kx - beta pi/2): aliasing plus truncation is at most 2 sum_{k>=n} psi(k)
    w = make_psi("inverse_factorial", 30, beta=0.7)
    phi = TrigPolynomial(np.concatenate([[0.0], np.ones(30)]), np.zeros(30))
    f = psi_integral(phi, w)
    n = 6
    p = interp_polynomial(spectrum_of(f, n))
    mid = interp_nodes(n) + math.pi / (2 * n - 1)
    err = np.max(np.abs(p(mid) - f(mid)))
    tail = sum(w.psi_at(k) for k in range(n, 31))
    assert 0.0 < err <= 2.0 * tail


# interpolation VP sums


def test_interp_vp_cos2x():
    d = spectrum_of(lambda x: np.cos(2 * x), 3)
    assert coeff_diff(interp_vp_sum(d, 3, 2), TrigPolynomial.cosine(2, 0.5)) <= 1e-13


def test_interp_vp_boundary_cases(rng):
    n = 7
    d = spectrum_of(random_poly(rng, 15), n)
    assert coeff_diff(interp_vp_sum(d, n, 1), interp_polynomial(d)) == 0.0
    full = interp_polynomial(d)
    fejer = TrigPolynomial.zero()
    for k in range(n):
        fejer = fejer + partial_sum(full, k)
    assert coeff_diff(interp_vp_sum(d, n, n), fejer.scaled(1.0 / n)) <= 1e-13


def test_interp_vp_range():
    d = spectrum_of(np.cos, 3)
    with pytest.raises(ValueError, match="parameter range"):
        interp_vp_sum(d, 3, 4)
    with pytest.raises(ValueError):
        interp_vp_sum(d, 4, 2)


@given(st.integers(1, 20), st.data())
def test_interp_vp_is_average_of_truncations(n, data):
    p = data.draw(st.integers(1, n))
    f = random_poly(np.random.default_rng(data.draw(st.integers(0, 2**32 - 1))), 2 * n + 3)
    d = spectrum_of(f, n)
    assert coeff_diff(interp_vp_sum(d, n, p), interp_partial_average(d, p)) <= 1e-12


@given(st.integers(1, 20), st.data())
def test_interp_vp_matches_vp_below_order_n(n, data):
    p = data.draw(st.integers(1, n))
    f = random_poly(np.random.default_rng(data.draw(st.integers(0, 2**32 - 1))), n - 1)
    assert coeff_diff(interp_vp_of(f, n, p), vp_sum(f, n, p)) <= 1e-12


# deviation


def test_rho_tilde_equals_rho_without_aliasing():
    w = make_psi("q_pow_k_squared", 24, q=0.5, beta=1.0)
    psi3 = w.psi_at(3)
    f = TrigPolynomial.cosine(3, psi3, phase=-math.pi / 2)
    rt, sup_t = deviation_rho_tilde(f, 4, 2)
    r, _ = deviation_rho(f, 4, 2, rt.grid)
    assert sup_t == pytest.approx(psi3 / 2, rel=1e-12)
    assert np.max(np.abs(rt.values - r.values)) <= 1e-15


def test_rho_tilde_vanishes_for_low_order(rng):
    _, sup = deviation_rho_tilde(random_poly(rng, 4), 7, 3)
    assert sup <= 1e-13


def test_rho_tilde_gap_for_single_high_harmonic():
    # cos 5x on 9 nodes aliases to cos 4x, which V~_{5,2} damps by lambda_4 = 1/2,
    # so rho~ - rho = -psi(5)/2 cos(4x - beta_5 pi/2) exactly
    w = make_psi("q_pow_k_squared", 24, q=0.5, beta=0.5)
    f = psi_integral(TrigPolynomial.cosine(5), w)
    n, p = 5, 2
    g = UniformGrid(8192)
    x = g.points
    nodes = interp_nodes(n)
    # brute force: literal node sums and literal partial-sum averages
    vt = interp_partial_average(discrete_coeffs(f(nodes), n), p)
    v = sum(partial_sum(f, k)(x) for k in range(n - p, n)) / p
    brute_gap = np.max(np.abs((f(x) - vt(x)) - (f(x) - v)))
    psi5 = w.psi_at(5)
    assert brute_gap == pytest.approx(psi5 / 2, rel=1e-9)

    rt, _ = deviation_rho_tilde(f, n, p, g)
    r, _ = deviation_rho(f, n, p, g)
    assert np.max(np.abs((rt.values - r.values) - ((f(x) - vt(x)) - (f(x) - v)))) <= 1e-15
    for s in (1.0, 2.0, 4.0):
        E = cos_norm(NormIndex(s))
        C = brute_gap / (E * w.tail_sum(n))
        assert 0.0 < C < 1.0


def test_spectral_and_callable_routes_agree(rng):
    f = random_poly(rng, 17)
    g = UniformGrid(1024)
    a, sa = deviation_rho_tilde(f, 9, 4, g)
    b, sb = deviation_rho_tilde(lambda x: f(x), 9, 4, g)
    assert np.max(np.abs(a.values - b.values)) <= 1e-12
    assert sa == pytest.approx(sb, abs=1e-12)


def test_rho_tilde_polynomial_keeps_small_deviation_accurate():
    # f huge at low order, tiny at high order: the deviation must come from the tiny part only
    w = make_psi("q_pow_k_squared", 24, q=0.5, beta=0.0)
    f = TrigPolynomial.cosine(1, 1e8) + psi_integral(TrigPolynomial.cosine(9), w)
    rho = rho_tilde_polynomial(f, 4, 1)
    assert abs(rho.a[1]) <= 1e-30
    assert rho.a[9] == pytest.approx(w.psi_at(9), rel=1e-14)
