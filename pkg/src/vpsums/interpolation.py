"""Trigonometric interpolation on 2n-1 equidistant nodes and its Vallee Poussin analog."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .trig_core import (
    SampledFunction,
    TrigPolynomial,
    UniformGrid,
    partial_sum,
    rho_polynomial,
    sup_norm,
    vp_multipliers,
)


@dataclass(frozen=True, eq=False)
class DiscreteSpectrum:
    """Discrete coefficients a_0..a_n and b_1..b_n built from 2n-1 node samples.

    Only k <= n-1 enters the interpolation polynomial; the k = n entries are
    kept because they expose the aliased edge coefficient.
    """

    n: int
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        if a.size != self.n + 1 or b.size != self.n:
            raise ValueError("discrete spectrum must hold a_0..a_n and b_1..b_n")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


def interp_nodes(n: int) -> np.ndarray:
    """x_j = 2*pi*j/(2n-1), j = 0..2n-2."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    N = 2 * n - 1
    return 2.0 * np.pi * np.arange(N) / N


def discrete_coeffs(samples, n: int) -> DiscreteSpectrum:
    samples = np.asarray(samples, dtype=float).ravel()
    N = 2 * n - 1
    if samples.size != N:
        raise ValueError(f"expected {N} samples for n={n}, got {samples.size}")
    x = interp_nodes(n)
    k = np.arange(n + 1)
    kx = np.multiply.outer(k, x)
    a = 2.0 / N * (np.cos(kx) @ samples)
    b = 2.0 / N * (np.sin(kx[1:]) @ samples)
    return DiscreteSpectrum(n, a, b)


def interp_polynomial(d: DiscreteSpectrum) -> TrigPolynomial:
    """The order n-1 polynomial interpolating the samples (S~_{n-1})."""
    return TrigPolynomial(d.a[: d.n], d.b[: d.n - 1])


def interp_vp_sum(d: DiscreteSpectrum, n: int, p: int) -> TrigPolynomial:
    """Interpolation Vallee Poussin sum: the lambda-weighted interpolation polynomial."""
    if n != d.n:
        raise ValueError(f"spectrum was built for n={d.n}, not n={n}")
    lam = vp_multipliers(n, p)
    return interp_polynomial(d).multiplied(lam)


def interp_partial_average(d: DiscreteSpectrum, p: int) -> TrigPolynomial:
    """(1/p) sum_{k=n-p}^{n-1} of truncated interpolation sums, computed literally."""
    n = d.n
    full = interp_polynomial(d)
    acc = TrigPolynomial.zero()
    for k in range(n - p, n):
        acc = acc + partial_sum(full, k)
    return acc.scaled(1.0 / p)


def interp_vp_of(f: Callable, n: int, p: int) -> TrigPolynomial:
    """V~_{n,p}(f) from point values of ``f`` at the interpolation nodes."""
    return interp_vp_sum(discrete_coeffs(f(interp_nodes(n)), n), n, p)


def rho_tilde_polynomial(f: TrigPolynomial, n: int, p: int) -> TrigPolynomial:
    """f - V~_{n,p}(f) for a spectral f.

    V~ is linear and reproduces harmonics of order <= n-1 up to the factor
    lambda_k, so only the part of f of order >= n has to go through the nodes.
    Sampling that part alone keeps relative accuracy when f is huge next to
    the deviation.
    """
    low = partial_sum(f, n - 1)
    high = f - low
    aliased = interp_vp_of(high, n, p) if high.order >= n else TrigPolynomial.zero()
    return rho_polynomial(low, n, p) + high - aliased


def deviation_rho_tilde(
    f: Union[TrigPolynomial, Callable],
    n: int,
    p: int,
    g: Optional[UniformGrid] = None,
):
    """Samples of rho~_{n,p}(f) = f - V~_{n,p}(f) on ``g`` and their sup norm.

    ``f`` is either a TrigPolynomial or any vectorised callable.
    """
    if isinstance(f, TrigPolynomial):
        g = g or UniformGrid.default_for(f.order)
        rho = rho_tilde_polynomial(f, n, p)
        sampled = SampledFunction(g, rho(g.points), rho)
        return sampled, sup_norm(sampled)
    g = g or UniformGrid(4096)
    vt = interp_vp_of(f, n, p)

    def rho_eval(x):
        return np.asarray(f(x), dtype=float) - vt(x)

    sampled = SampledFunction(g, rho_eval(g.points), rho_eval)
    return sampled, sup_norm(sampled)
