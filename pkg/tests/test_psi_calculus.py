import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vpsums.psi_calculus import (
    VPProfile,
    kernel_full,
    kernel_polynomial,
    kernel_truncated,
    make_beta,
    make_psi,
    psi_derivative,
    psi_integral,
    tau,
    tau_sum,
    tau_sum_direct,
    tau_sum_piecewise,
    truncated_kernel_polynomial,
)
from vpsums.trig_core import TrigPolynomial, UniformGrid, eval_poly

TWO_K2 = make_psi("q_pow_k_squared", 24, q=0.5)


def random_poly(rng, order, mean=True):
    a = rng.standard_normal(order + 1)
    if not mean:
        a[0] = 0.0
    return TrigPolynomial(a, rng.standard_normal(order))


def coeff_diff(p, q):
    K = max(p.order, q.order)
    d = p.padded(K) - q.padded(K)
    return float(np.max(np.abs(np.concatenate([d.a, d.b]))))


def weight(beta_mode="zero", family="q_pow_k_squared", K=24):
    kw = {"q": 0.5} if family == "q_pow_k_squared" else {}
    w = make_psi(family, K, **kw)
    return w.with_beta(make_beta(beta_mode, w.K_max, value=0.3))


# make_psi


def test_two_pow_k_squared_values():
    w = make_psi("q_pow_k_squared", 12, q=0.5)
    assert w.psi[:4].tolist() == [0.5, 0.0625, 0.001953125, 2.0**-16]
    ratios = w.psi[1:] / w.psi[:-1]
    assert np.allclose(ratios, [2.0 ** -(2 * k + 1) for k in range(1, 12)], rtol=1e-12)
    assert w.ratios_monotone


def test_inverse_factorial_ratios():
    w = make_psi("inverse_factorial", 12)
    ratios = w.psi[1:] / w.psi[:-1]
    assert np.allclose(ratios, [1.0 / (k + 1) for k in range(1, 12)], rtol=1e-12)
    assert ratios[-1] == pytest.approx(1.0 / 12)


def test_inverse_square_rejected():
    with pytest.raises(ValueError, match="not certified"):
        make_psi("explicit", values=[1.0 / k**2 for k in range(1, 40)])


@pytest.mark.parametrize(
    "kwargs",
    [
        {"family": "explicit", "values": [1.0, 0.1, 0.0, 1e-5]},
        {"family": "explicit", "values": [1.0, -0.1, 1e-3, 1e-5]},
        {"family": "q_pow_k_squared", "q": 1.5},
        {"family": "nope"},
        {"family": "inverse_factorial", "K_max": 3},
    ],
)
def test_make_psi_errors(kwargs):
    with pytest.raises(ValueError):
        make_psi(**kwargs)


def test_default_cutoff_reaches_relative_floor():
    w = make_psi("inverse_factorial")
    assert w.psi[-1] < 1e-30 * w.psi[0]


@given(st.sampled_from(["q_pow_k_squared", "inverse_factorial"]), st.integers(6, 30))
def test_tail_bound_dominates_geometric_tail(family, K):
    w = weight(family=family, K=K)
    r = w.psi[-1] / w.psi[-2]
    assert w.tail_bound >= w.psi[-1] * r / (1 - r) * (1 - 1e-15)
    # and it is a true upper bound for the omitted terms
    longer = weight(family=family, K=min(K + 20, 31))
    assert w.tail_bound >= math.fsum(longer.psi[K:]) * (1 - 1e-12)


def test_beta_modes():
    assert make_beta("alternating", 4).tolist() == [0.0, 1.0, 0.0, 1.0]
    assert make_beta("one", 3).tolist() == [1.0, 1.0, 1.0]
    assert make_beta("constant", 2, value=0.25).tolist() == [0.25, 0.25]
    with pytest.raises(ValueError):
        make_beta("constant", 2)


# kernels


def test_kernel_single_harmonic():
    w = make_psi("explicit", values=[1.0, 1e-20, 1e-60, 1e-120])
    g = UniformGrid(64)
    v = kernel_full(w, g).values
    assert np.max(np.abs(v - np.cos(g.points))) <= 1e-15


def test_kernel_phase_one_gives_sines():
    w = weight("one")
    g = UniformGrid(256)
    x = g.points
    direct = sum(w.psi_at(k) * np.sin(k * x) for k in range(1, w.K_max + 1))
    assert np.max(np.abs(kernel_full(w, g).values - direct)) <= 1e-14


def test_kernel_value_at_zero():
    oracle = math.fsum(2.0 ** -(k * k) for k in range(1, 60))
    assert oracle == pytest.approx(0.564468, abs=1e-6)
    v = kernel_full(TWO_K2, UniformGrid(256)).values[0]
    assert abs(v - oracle) <= TWO_K2.tail_bound + 1e-16


def test_kernel_rejects_coarse_grid():
    with pytest.raises(ValueError, match="grid too coarse"):
        kernel_full(TWO_K2, UniformGrid(16))


def test_truncated_kernel_with_p1_is_tail_kernel():
    w = weight("alternating")
    n = 5
    tk = truncated_kernel_polynomial(w, n, 1, 1)
    assert coeff_diff(tk, kernel_polynomial(w, start=n)) == 0.0


def test_truncated_kernel_first_term():
    w = weight("constant")
    tk = truncated_kernel_polynomial(w, 5, 3, 2)
    assert np.all(tk.a[:4] == 0.0) and np.all(tk.b[:3] == 0.0)
    th = w.beta_at(4) * math.pi / 2
    assert tk.a[4] == pytest.approx(2 / 3 * w.psi_at(4) * math.cos(th), rel=1e-14)
    assert tk.b[3] == pytest.approx(2 / 3 * w.psi_at(4) * math.sin(th), rel=1e-14)


def test_truncated_kernel_samples_match_polynomial():
    w = weight("alternating")
    g = UniformGrid(512)
    s = kernel_truncated(w, 7, 3, 2, g)
    assert np.max(np.abs(s.values - truncated_kernel_polynomial(w, 7, 3, 2)(g.points))) <= 1e-15


@pytest.mark.parametrize("n,p,j", [(3, 4, 1), (3, 0, 1), (3, 2, 0)])
def test_truncated_kernel_ranges(n, p, j):
    with pytest.raises(ValueError):
        truncated_kernel_polynomial(TWO_K2, n, p, j)


@given(st.integers(2, 14), st.data())
def test_truncated_kernel_orthogonal_to_low_order(n, data):
    p = data.draw(st.integers(1, n - 1))
    w = weight(data.draw(st.sampled_from(["zero", "one", "alternating", "constant"])), "inverse_factorial", 30)
    t = random_poly(np.random.default_rng(data.draw(st.integers(0, 2**32 - 1))), n - p)
    g = UniformGrid(4096)
    K = eval_poly(truncated_kernel_polynomial(w, n, p, 2), g).values
    T = eval_poly(t, g).values
    inner = g.h * float(np.sum(K * T))
    scale = math.sqrt(g.h * np.sum(K * K)) * math.sqrt(g.h * np.sum(T * T))
    assert abs(inner) <= 1e-8 * scale + 1e-300


@given(st.integers(0, 2**32 - 1))
def test_zero_phase_kernels_are_even(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 12))
    p = int(rng.integers(1, n + 1))
    g = UniformGrid(1024)
    x = g.points
    for poly in (kernel_polynomial(TWO_K2), truncated_kernel_polynomial(TWO_K2, n, p, 2)):
        assert np.max(np.abs(poly(x) - poly(-x))) <= 1e-12


# derivative and integral


def test_derivative_examples():
    w = weight("zero")
    f = TrigPolynomial.cosine(1, w.psi_at(1))
    assert coeff_diff(psi_derivative(f, w), TrigPolynomial.cosine(1)) <= 1e-15
    w1 = weight("one")
    assert coeff_diff(psi_derivative(f, w1), TrigPolynomial.sine(1, -1.0)) <= 1e-15


def test_derivative_drops_constant():
    assert psi_derivative(TrigPolynomial([5.0, 1.0], [0.0]), TWO_K2).a[0] == 0.0


def test_integral_examples():
    w = weight("constant")
    for k in (1, 4, 9):
        F = psi_integral(TrigPolynomial.cosine(k), w)
        expect = TrigPolynomial.cosine(k, w.psi_at(k), phase=-w.beta_at(k) * math.pi / 2)
        assert coeff_diff(F, expect) <= 1e-15
    F = psi_integral(TrigPolynomial.sine(3), TWO_K2)
    assert coeff_diff(F, TrigPolynomial.sine(3, TWO_K2.psi_at(3))) <= 1e-18


def test_order_beyond_cutoff_rejected():
    w = make_psi("q_pow_k_squared", 8, q=0.5)
    with pytest.raises(ValueError):
        psi_integral(TrigPolynomial.cosine(9), w)
    with pytest.raises(ValueError):
        psi_derivative(TrigPolynomial.cosine(9), w)


@given(st.integers(1, 8), st.integers(0, 2**32 - 1), st.sampled_from(["zero", "one", "alternating", "constant"]))
def test_derivative_inverts_integral(order, seed, mode):
    w = weight(mode, "inverse_factorial", 30)
    phi = random_poly(np.random.default_rng(seed), order, mean=False)
    assert coeff_diff(psi_derivative(psi_integral(phi, w), w), phi) <= 1e-12


@given(st.integers(0, 2**32 - 1), st.sampled_from(["zero", "one", "alternating", "constant"]))
def test_integral_equals_convolution(seed, mode):
    w = weight(mode)
    phi = random_poly(np.random.default_rng(seed), 8, mean=False)
    g = UniformGrid(4096)
    x = g.points
    Kv = kernel_full(w, g).values
    ph = phi(x)
    # (1/pi) sum_t phi(x_i - t_j) Psi(t_j) h by circular convolution on the grid
    conv = np.real(np.fft.ifft(np.fft.fft(ph) * np.fft.fft(Kv))) * g.h / math.pi
    assert np.max(np.abs(conv - psi_integral(phi, w)(x))) <= 1e-9


# tau sums


def test_profile_values():
    prof = VPProfile(5, 3)
    assert prof(3) == pytest.approx(1 / 3)
    assert prof(4) == pytest.approx(2 / 3)
    assert prof(5) == 1.0 and prof(9) == 1.0
    with pytest.raises(ValueError):
        prof(2)
    assert tau(6, 1, 6) == 1.0


def test_tau_sum_plain_when_p_le_j():
    w = TWO_K2
    for n, p, j in [(5, 2, 2), (7, 1, 1), (9, 3, 3)]:
        value, _ = tau_sum(w, n, p, j)
        assert value == pytest.approx(w.tail_sum(n - p + j), rel=1e-15)


def test_tau_sum_example():
    value, bound = tau_sum(TWO_K2, 5, 3, 2)
    oracle = Fraction(2, 3) * Fraction(1, 2**16) + sum(Fraction(1, 2 ** (k * k)) for k in range(5, 40))
    assert value == pytest.approx(float(oracle), rel=1e-14)
    assert float(Fraction(2, 3) * Fraction(1, 2**16)) == pytest.approx(1.0173e-5, rel=1e-4)
    assert value <= bound


@pytest.mark.parametrize("family", ["q_pow_k_squared", "inverse_factorial"])
def test_tau_sum_forms_agree_exhaustively(family):
    w = weight(family=family, K=30)
    for n in range(1, 21):
        for p in range(1, n + 1):
            for j in (1, 2, 3):
                a = tau_sum_direct(w, n, p, j)
                b = tau_sum_piecewise(w, n, p, j)
                assert abs(a - b) <= 1e-15 * max(a, 1e-300)


@given(st.integers(1, 20), st.data())
def test_tau_sum_below_min_bound(n, data):
    p = data.draw(st.integers(1, n))
    j = data.draw(st.integers(1, 3))
    w = weight(family=data.draw(st.sampled_from(["q_pow_k_squared", "inverse_factorial"])), K=30)
    value, bound = tau_sum(w, n, p, j)
    assert value <= bound * (1 + 1e-14)
