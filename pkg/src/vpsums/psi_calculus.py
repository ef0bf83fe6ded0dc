"""Weights psi(k), phases beta_k and the spectral (psi, beta)-calculus.

The (psi, beta)-integral of phi scales harmonic k by psi(k) and rotates it by
-beta_k*pi/2; the (psi, beta)-derivative is its inverse. Infinite sums over k
are cut at K_max and closed with a geometric tail bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .trig_core import SampledFunction, TrigPolynomial, UniformGrid

DEFAULT_RATIO_THRESHOLD = 0.2


@dataclass(frozen=True, eq=False)
class PsiBetaWeight:
    """psi(1..K_max) > 0 with phases beta_1..beta_K_max and a finite D0 certificate.

    ``psi`` and ``beta`` are stored 0-based (``psi[k-1]`` is psi(k)); use
    :meth:`psi_at` / :meth:`beta_at` for 1-based access.
    """

    psi: np.ndarray
    beta: np.ndarray
    tail_bound: float
    d0_ratio: float
    ratios_monotone: bool
    family: str = "explicit"

    @property
    def K_max(self) -> int:
        return self.psi.size

    def psi_at(self, k: int) -> float:
        if not 1 <= k <= self.K_max:
            raise IndexError(f"psi({k}) is outside the stored range 1..{self.K_max}")
        return float(self.psi[k - 1])

    def beta_at(self, k: int) -> float:
        if not 1 <= k <= self.K_max:
            raise IndexError(f"beta_{k} is outside the stored range 1..{self.K_max}")
        return float(self.beta[k - 1])

    def tail_sum(self, start: int) -> float:
        """sum_{k >= start} psi(k), stored terms plus the tail bound."""
        start = max(start, 1)
        return math.fsum(self.psi[start - 1 :]) + self.tail_bound

    def with_beta(self, beta: Sequence[float]) -> "PsiBetaWeight":
        return PsiBetaWeight(self.psi, _beta_array(beta, self.K_max), self.tail_bound,
                             self.d0_ratio, self.ratios_monotone, self.family)


def _beta_array(beta, K: int) -> np.ndarray:
    if beta is None:
        out = np.zeros(K)
    elif np.isscalar(beta):
        out = np.full(K, float(beta))
    else:
        b = np.asarray(beta, dtype=float).ravel()
        if b.size < K:
            raise ValueError(f"beta has {b.size} entries, need {K}")
        out = b[:K].copy()
    out.setflags(write=False)
    return out


def make_beta(mode: str, K_max: int, value: Optional[float] = None, values=None) -> np.ndarray:
    """Phase sequence: ``zero``, ``one``, ``alternating`` (0 at odd k, 1 at even k), ``constant`` or ``explicit``."""
    k = np.arange(1, K_max + 1)
    if mode in ("zero", "all-0", "0"):
        return np.zeros(K_max)
    if mode in ("one", "all-1", "1"):
        return np.ones(K_max)
    if mode in ("alternating", "alt"):
        return (k % 2 == 0).astype(float)
    if mode == "constant":
        if value is None:
            raise ValueError("constant beta needs a value")
        return np.full(K_max, float(value))
    if mode == "explicit":
        return _beta_array(values, K_max)
    raise ValueError(f"unknown beta mode {mode!r}")


def default_kmax(psi_fn, rel: float = 1e-30, k_min: int = 4, k_limit: int = 400) -> int:
    first = psi_fn(1)
    for k in range(k_min, k_limit):
        if psi_fn(k) < rel * first:
            return k
    return k_limit


def make_psi(
    family: str,
    K_max: Optional[int] = None,
    *,
    q: Optional[float] = None,
    values: Optional[Sequence[float]] = None,
    beta=None,
    threshold: float = DEFAULT_RATIO_THRESHOLD,
) -> PsiBetaWeight:
    """Build a certified weight.

    Families: ``q_pow_k_squared`` (psi(k) = q**(k*k)), ``inverse_factorial``
    (psi(k) = 1/k!) and ``explicit`` (``values`` = psi(1), psi(2), ...).

    The limit condition psi(k+1)/psi(k) -> 0 cannot be checked at a finite
    cutoff, so the surrogate is: the last ratio is below ``threshold`` and the
    ratios over the last four indices do not increase.
    """
    if family == "q_pow_k_squared":
        if q is None or not 0.0 < q < 1.0:
            raise ValueError("q_pow_k_squared needs 0 < q < 1")
        fn = lambda k: q ** (k * k)  # noqa: E731
        label = f"q_pow_k_squared({q:g})"
    elif family == "inverse_factorial":
        fn = lambda k: math.exp(-math.lgamma(k + 1.0))  # noqa: E731
        label = "inverse_factorial"
    elif family == "explicit":
        if values is None:
            raise ValueError("explicit family needs values")
        vals = [float(v) for v in values]
        fn = lambda k: vals[k - 1]  # noqa: E731
        label = "explicit"
        if K_max is None:
            K_max = len(vals)
        if K_max > len(vals):
            raise ValueError(f"explicit psi has {len(vals)} values, K_max={K_max}")
    else:
        raise ValueError(f"unknown psi family {family!r}")

    if K_max is None:
        K_max = default_kmax(fn)
    if K_max < 4:
        raise ValueError("K_max must be at least 4")

    psi = np.array([fn(k) for k in range(1, K_max + 1)], dtype=float)
    if not np.all(psi > 0.0) or not np.all(np.isfinite(psi)):
        raise ValueError("psi must be positive and finite (raise K_max limits or pick another family)")
    ratios = psi[1:] / psi[:-1]
    last = ratios[-3:]
    monotone = bool(np.all(np.diff(last) <= 1e-15 * np.abs(last[:-1])))
    r = float(ratios[-1])
    if not monotone or r >= threshold:
        raise ValueError(
            f"psi is not certified D0 at K_max={K_max}: last ratio {r:.3g} "
            f"(threshold {threshold}), ratios non-increasing over last indices: {monotone}"
        )
    tail = float(psi[-1] * r / (1.0 - r))
    psi.setflags(write=False)
    return PsiBetaWeight(psi, _beta_array(beta, K_max), tail, float(ratios.max()), monotone, label)


@dataclass(frozen=True)
class VPProfile:
    """tau_{n,p}(k): 1 - (n-k)/p for n-p+1 <= k <= n-1 and 1 for k >= n."""

    n: int
    p: int

    def __post_init__(self):
        if not 1 <= self.p <= self.n:
            raise ValueError(f"parameter range: need 1 <= p <= n, got n={self.n}, p={self.p}")

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        out = np.where(k >= self.n, 1.0, 1.0 - (self.n - k) / self.p)
        if np.any(k < self.n - self.p + 1):
            raise ValueError(f"tau_{{n,p}}(k) is defined for k >= n-p+1 = {self.n - self.p + 1}")
        return out if out.ndim else float(out)


def tau(n: int, p: int, k):
    return VPProfile(n, p)(k)


def _rotated(psi_k: np.ndarray, theta: np.ndarray):
    """Coefficients of psi_k * cos(k t - theta)."""
    return psi_k * np.cos(theta), psi_k * np.sin(theta)


def kernel_polynomial(w: PsiBetaWeight, weights: Optional[np.ndarray] = None, start: int = 1) -> TrigPolynomial:
    """sum_{k >= start} weights_k psi(k) cos(k t - beta_k pi/2) truncated at K_max."""
    K = w.K_max
    k = np.arange(1, K + 1)
    wk = np.ones(K) if weights is None else np.asarray(weights, dtype=float)
    amp = np.where(k >= start, wk * w.psi, 0.0)
    ca, sb = _rotated(amp, w.beta * np.pi / 2.0)
    return TrigPolynomial(np.concatenate([[0.0], ca]), sb)


def kernel_full(w: PsiBetaWeight, g: UniformGrid) -> SampledFunction:
    """Samples of sum_k psi(k) cos(k t - beta_k pi/2); pointwise error <= w.tail_bound."""
    if not g.resolves(w.K_max):
        raise ValueError(f"grid too coarse: M={g.M} for K_max={w.K_max}")
    poly = kernel_polynomial(w)
    return SampledFunction(g, poly(g.points), poly)


def truncated_kernel_polynomial(w: PsiBetaWeight, n: int, p: int, j: int) -> TrigPolynomial:
    if j < 1:
        raise ValueError("parameter range: j must be >= 1")
    prof = VPProfile(n, p)
    start = n - p + j
    k = np.arange(1, w.K_max + 1)
    weights = np.zeros(w.K_max)
    mask = k >= start
    weights[mask] = prof(k[mask])
    return kernel_polynomial(w, weights, start)


def kernel_truncated(w: PsiBetaWeight, n: int, p: int, j: int, g: UniformGrid) -> SampledFunction:
    """Samples of Psi_{j,n,p}(t) = sum_{k >= n-p+j} tau_{n,p}(k) psi(k) cos(k t - beta_k pi/2)."""
    if not g.resolves(w.K_max):
        raise ValueError(f"grid too coarse: M={g.M} for K_max={w.K_max}")
    poly = truncated_kernel_polynomial(w, n, p, j)
    return SampledFunction(g, poly(g.points), poly)


def _check_order(f: TrigPolynomial, w: PsiBetaWeight) -> None:
    if f.effective_order() > w.K_max:
        raise ValueError(f"order {f.effective_order()} exceeds K_max={w.K_max}")


def _rotate(f: TrigPolynomial, scale: np.ndarray, theta: np.ndarray) -> TrigPolynomial:
    """Map each harmonic a cos kx + b sin kx to scale_k (a cos(kx+theta_k) + b sin(kx+theta_k))."""
    K = f.order
    a, b = f.a[1:], f.b
    c, s = np.cos(theta[:K]), np.sin(theta[:K])
    sc = scale[:K]
    new_a = sc * (a * c + b * s)
    new_b = sc * (b * c - a * s)
    return TrigPolynomial(np.concatenate([[0.0], new_a]), new_b)


def psi_derivative(f: TrigPolynomial, w: PsiBetaWeight) -> TrigPolynomial:
    """(psi, beta)-derivative: harmonic k scaled by 1/psi(k), rotated by +beta_k pi/2; constant dropped."""
    _check_order(f, w)
    f = partial_sum_to(f, w.K_max)
    return _rotate(f, 1.0 / w.psi, w.beta * np.pi / 2.0)


def psi_integral(phi: TrigPolynomial, w: PsiBetaWeight) -> TrigPolynomial:
    """(psi, beta)-integral: harmonic k scaled by psi(k), rotated by -beta_k pi/2; a_0 carried unchanged."""
    _check_order(phi, w)
    phi = partial_sum_to(phi, w.K_max)
    out = _rotate(phi, w.psi, -w.beta * np.pi / 2.0)
    return out + TrigPolynomial(np.array([phi.a[0]]))


def partial_sum_to(f: TrigPolynomial, K: int) -> TrigPolynomial:
    if f.order <= K:
        return f
    return TrigPolynomial(f.a[: K + 1], f.b[:K])


def tau_sum_direct(w: PsiBetaWeight, n: int, p: int, j: int) -> float:
    """sum_{k >= n-p+j} tau_{n,p}(k) psi(k) by direct weighting."""
    if j < 1:
        raise ValueError("j must be >= 1")
    start = n - p + j
    prof = VPProfile(n, p)
    k = np.arange(max(start, 1), w.K_max + 1)
    terms = prof(k) * w.psi[k - 1] if k.size else np.zeros(0)
    return math.fsum(terms) + w.tail_bound


def tau_sum_piecewise(w: PsiBetaWeight, n: int, p: int, j: int) -> float:
    """Same sum via the split into a linear ramp below n and a plain tail from n on."""
    if j < 1:
        raise ValueError("j must be >= 1")
    start = n - p + j
    if p > j:
        ramp = [(k - n + p) / p * w.psi[k - 1] for k in range(start, min(n - 1, w.K_max) + 1)]
        return math.fsum(ramp + list(w.psi[n - 1 :])) + w.tail_bound
    return math.fsum(w.psi[start - 1 :]) + w.tail_bound


def tau_sum(w: PsiBetaWeight, n: int, p: int, j: int):
    """Return (value, min_bound) for sum_{k >= n-p+j} tau_{n,p}(k) psi(k).

    ``min_bound`` is min{sum psi(k), (1/p) sum (k-n+p) psi(k)} over the same
    range; each tail beyond K_max is bounded geometrically.
    """
    value = tau_sum_piecewise(w, n, p, j)
    start = n - p + j
    K = w.K_max
    plain = w.tail_sum(start)
    k = np.arange(start, K + 1)
    r = w.psi[-1] / w.psi[-2]
    # sum_{i>=1} (K+i-n+p)/p * psi(K) r^i
    ramp_tail = w.psi[-1] / p * ((K - n + p) * r / (1.0 - r) + r / (1.0 - r) ** 2)
    weighted = math.fsum((k - n + p) / p * w.psi[k - 1]) + max(ramp_tail, w.tail_bound)
    return float(value), float(min(plain, weighted))
