"""Trigonometric polynomials on the circle and the classical summation operators.

Everything is 2*pi-periodic and uses the convention

    t(x) = a_0/2 + sum_{k=1}^{K} (a_k cos kx + b_k sin kx),

so the constant coefficient is stored raw and halved only at evaluation.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammaln

TWO_PI = 2.0 * np.pi


class Norm(enum.Enum):
    """Distinguished exponent value standing for s = infinity."""

    INF = "inf"


@dataclass(frozen=True)
class NormIndex:
    """Exponent s in [1, inf] of an L_s norm, with its conjugate exponent."""

    s: Union[float, Norm]

    def __post_init__(self):
        if isinstance(self.s, Norm):
            return
        s = float(self.s)
        if not (s >= 1.0) or math.isinf(s) or math.isnan(s):
            raise ValueError(f"norm exponent must lie in [1, inf), got {self.s!r}; use Norm.INF for infinity")
        object.__setattr__(self, "s", s)

    @classmethod
    def infinity(cls) -> "NormIndex":
        return cls(Norm.INF)

    @classmethod
    def parse(cls, value: Any) -> "NormIndex":
        """Accept floats, ints, ``"inf"``/``"infinity"``/``"C"`` and NormIndex."""
        if isinstance(value, NormIndex):
            return value
        if isinstance(value, Norm):
            return cls(value)
        if isinstance(value, str):
            if value.strip().lower() in ("inf", "infinity", "c", "oo"):
                return cls(Norm.INF)
            return cls(float(value))
        if isinstance(value, float) and math.isinf(value):
            return cls(Norm.INF)
        return cls(float(value))

    @property
    def is_inf(self) -> bool:
        return self.s is Norm.INF

    @property
    def value(self) -> float:
        if self.is_inf:
            raise ValueError("s = infinity has no finite value")
        return self.s  # type: ignore[return-value]

    @property
    def conj(self) -> "NormIndex":
        if self.is_inf:
            return NormIndex(1.0)
        if self.s == 1.0:
            return NormIndex(Norm.INF)
        return NormIndex(self.s / (self.s - 1.0))

    @property
    def s_conj(self) -> "NormIndex":
        return self.conj

    @property
    def label(self) -> str:
        return "inf" if self.is_inf else f"{self.s:g}"

    def __str__(self) -> str:
        return self.label


def cos_norm(idx: NormIndex) -> float:
    """||cos t||_s over one period, in closed form.

    Uses int_{-pi}^{pi} |cos t|^s dt = 2 sqrt(pi) Gamma((s+1)/2) / Gamma(s/2 + 1).
    """
    if idx.is_inf:
        return 1.0
    s = idx.value
    log_int = math.log(2.0) + 0.5 * math.log(math.pi) + gammaln((s + 1.0) / 2.0) - gammaln(s / 2.0 + 1.0)
    return math.exp(log_int / s)


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """Real trigonometric polynomial stored by its cosine/sine coefficients.

    ``a`` holds a_0..a_K and ``b`` holds b_1..b_K; the shorter one is padded
    with zeros so that both describe the same order K.
    """

    a: np.ndarray
    b: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        a = np.array(self.a, dtype=float).ravel()
        b = np.array(self.b, dtype=float).ravel()
        if a.size == 0:
            a = np.zeros(1)
        K = max(a.size - 1, b.size)
        a = np.concatenate([a, np.zeros(K + 1 - a.size)])
        b = np.concatenate([b, np.zeros(K - b.size)])
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("trigonometric coefficients must be finite")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    # construction helpers
    @classmethod
    def zero(cls) -> "TrigPolynomial":
        return cls(np.zeros(1))

    @classmethod
    def constant(cls, value: float) -> "TrigPolynomial":
        return cls(np.array([2.0 * value]))

    @classmethod
    def cosine(cls, k: int, amplitude: float = 1.0, phase: float = 0.0) -> "TrigPolynomial":
        """amplitude * cos(k x + phase)."""
        if k == 0:
            return cls.constant(amplitude * math.cos(phase))
        a = np.zeros(k + 1)
        b = np.zeros(k)
        a[k] = amplitude * math.cos(phase)
        b[k - 1] = -amplitude * math.sin(phase)
        return cls(a, b)

    @classmethod
    def sine(cls, k: int, amplitude: float = 1.0) -> "TrigPolynomial":
        return cls.cosine(k, amplitude, -math.pi / 2.0)

    @classmethod
    def from_harmonics(cls, a_full: np.ndarray, b_full: np.ndarray) -> "TrigPolynomial":
        """Build from arrays indexed by harmonic number (``b_full[0]`` ignored)."""
        return cls(np.asarray(a_full, dtype=float), np.asarray(b_full, dtype=float)[1:])

    # coefficient views
    @property
    def order(self) -> int:
        return self.a.size - 1

    @property
    def b_full(self) -> np.ndarray:
        """Sine coefficients indexed by harmonic number, with a leading zero."""
        return np.concatenate([[0.0], self.b])

    def padded(self, K: int) -> "TrigPolynomial":
        if K <= self.order:
            return self
        return TrigPolynomial(np.concatenate([self.a, np.zeros(K - self.order)]), self.b)

    def amplitudes(self) -> np.ndarray:
        """sqrt(a_k^2 + b_k^2) for k = 0..K (the k = 0 entry is |a_0/2|)."""
        amp = np.hypot(self.a, self.b_full)
        amp[0] = abs(self.a[0]) / 2.0
        return amp

    def effective_order(self, tol: float = 0.0) -> int:
        nz = np.nonzero(self.amplitudes() > tol)[0]
        return int(nz[-1]) if nz.size else 0

    # arithmetic
    def _binary(self, other: "TrigPolynomial", sign: float) -> "TrigPolynomial":
        K = max(self.order, other.order)
        x, y = self.padded(K), other.padded(K)
        return TrigPolynomial(x.a + sign * y.a, x.b + sign * y.b)

    def __add__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        return self._binary(other, 1.0)

    def __sub__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        return self._binary(other, -1.0)

    def __neg__(self) -> "TrigPolynomial":
        return TrigPolynomial(-self.a, -self.b)

    def scaled(self, c: float) -> "TrigPolynomial":
        return TrigPolynomial(c * self.a, c * self.b)

    def multiplied(self, weights: np.ndarray) -> "TrigPolynomial":
        """Harmonic-wise multiplier: weights[k] scales (a_k, b_k); missing weights are zero."""
        w = np.zeros(self.order + 1)
        m = min(len(weights), self.order + 1)
        w[:m] = np.asarray(weights, dtype=float)[:m]
        return TrigPolynomial(w * self.a, w[1:] * self.b)

    # evaluation
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.full(flat.shape, self.a[0] / 2.0)
        if self.order > 0:
            k = np.arange(1, self.order + 1)
            kx = np.multiply.outer(flat, k)
            out = out + np.cos(kx) @ self.a[1:] + np.sin(kx) @ self.b
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def __repr__(self) -> str:
        return f"TrigPolynomial(order={self.order}, a={self.a.tolist()}, b={self.b.tolist()})"


@dataclass(frozen=True)
class UniformGrid:
    """M equispaced points x_j = 2*pi*j/M on one period."""

    M: int

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"grid size must be a positive integer, got {self.M!r}")
        object.__setattr__(self, "M", int(self.M))

    @cached_property
    def points(self) -> np.ndarray:
        x = TWO_PI * np.arange(self.M) / self.M
        x.setflags(write=False)
        return x

    @property
    def h(self) -> float:
        return TWO_PI / self.M

    def resolves(self, order: int) -> bool:
        return self.M >= 2 * order + 1

    @classmethod
    def default_for(cls, order: int) -> "UniformGrid":
        return cls(max(4096, 16 * order + 64))


Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Samples on a uniform grid, optionally backed by an exact evaluator.

    An evaluator may expose ``breakpoints`` (points of non-smoothness in one
    period); norms then integrate piecewise instead of on the grid.
    """

    grid: UniformGrid
    values: np.ndarray
    evaluator: Optional[Evaluator] = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size != self.grid.M:
            raise ValueError(f"expected {self.grid.M} samples, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_evaluator(cls, evaluator: Evaluator, grid: UniformGrid) -> "SampledFunction":
        return cls(grid, np.asarray(evaluator(grid.points), dtype=float), evaluator)

    def check_evaluator(self, tol: float = 1e-12) -> bool:
        if self.evaluator is None:
            return True
        ref = np.asarray(self.evaluator(self.grid.points), dtype=float)
        return bool(np.max(np.abs(ref - self.values)) <= tol * max(1.0, np.max(np.abs(ref))))

    def __call__(self, x):
        if self.evaluator is None:
            raise ValueError("no evaluator attached; only grid values are known")
        return self.evaluator(x)


def eval_poly(p: TrigPolynomial, g: UniformGrid) -> SampledFunction:
    return SampledFunction(g, p(g.points), p)


def fourier_analyze(f: SampledFunction, K: int) -> TrigPolynomial:
    """Discrete Fourier coefficients of order <= K from uniform samples.

    a_k = (2/M) sum_j f_j cos k x_j and b_k = (2/M) sum_j f_j sin k x_j, which
    are exact for trigonometric polynomials of order <= (M-1)/2.
    """
    M = f.grid.M
    if K < 0 or M < 2 * K + 1:
        raise ValueError(f"grid too coarse: M={M} cannot resolve order K={K} (need M >= 2K+1)")
    X = np.fft.rfft(f.values)[: K + 1]
    a = 2.0 / M * X.real
    b = -2.0 / M * X.imag[1:]
    return TrigPolynomial(a, b)


def _breakpoints(evaluator) -> Optional[np.ndarray]:
    bp = getattr(evaluator, "breakpoints", None)
    if bp is None:
        return None
    return np.asarray(bp, dtype=float)


def integrate_periodic(func: Evaluator, breakpoints: Sequence[float], start: float = -np.pi) -> float:
    """Integral over one period, split at the given breakpoints (adaptive quadrature per piece)."""
    bp = np.sort(np.mod(np.asarray(breakpoints, dtype=float) - start, TWO_PI)) + start
    edges = np.unique(np.concatenate([[start], bp, [start + TWO_PI]]))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 0.0:
            continue
        with warnings.catch_warnings():
            # tolerances sit at machine precision on purpose; quad reports that as roundoff
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(lambda t: float(func(t)), lo, hi, epsabs=1e-15, epsrel=1e-13, limit=200)
        total += val
    return total


def sup_norm(f: SampledFunction, refine: bool = True, n_candidates: int = 8) -> float:
    """Max |f|; with an evaluator the best grid maxima are polished by bounded scalar search."""
    v = np.abs(f.values)
    best = float(v.max()) if v.size else 0.0
    if not refine or f.evaluator is None or best == 0.0:
        return best
    left, right = np.roll(v, 1), np.roll(v, -1)
    cand = np.nonzero((v >= left) & (v >= right))[0]
    cand = cand[np.argsort(v[cand])[::-1][:n_candidates]]
    x, h = f.grid.points, f.grid.h
    ev = f.evaluator
    for j in cand:
        res = optimize.minimize_scalar(
            lambda t: -abs(float(ev(t))),
            bounds=(x[j] - h, x[j] + h),
            method="bounded",
            options={"xatol": 1e-12 * max(1.0, abs(x[j]))},
        )
        best = max(best, -float(res.fun))
    return best


def norm(f: SampledFunction, idx: NormIndex, refine: bool = True) -> float:
    """L_s norm over one period (s = infinity gives the sup norm).

    Finite s uses the periodic rectangle rule on the grid, or piecewise
    adaptive quadrature when the evaluator declares breakpoints.
    """
    if idx.is_inf:
        return sup_norm(f, refine=refine)
    s = idx.value
    bp = _breakpoints(f.evaluator)
    if refine and bp is not None:
        ev = f.evaluator
        scale = float(np.max(np.abs(f.values))) or 1.0
        total = integrate_periodic(lambda t: abs(float(ev(t)) / scale) ** s, bp)
        return scale * total ** (1.0 / s)
    scale = float(np.max(np.abs(f.values)))
    if scale == 0.0:
        return 0.0
    return scale * (f.grid.h * np.sum((np.abs(f.values) / scale) ** s)) ** (1.0 / s)


def partial_sum(p: TrigPolynomial, k: int) -> TrigPolynomial:
    """Fourier partial sum S_k: truncation to order min(k, order)."""
    if k < 0:
        raise ValueError("partial sum order must be >= 0")
    k = min(k, p.order)
    return TrigPolynomial(p.a[: k + 1], p.b[:k])


def _check_np(n: int, p: int) -> None:
    if not (1 <= p <= n):
        raise ValueError(f"parameter range: need 1 <= p <= n, got n={n}, p={p}")


def vp_multipliers(n: int, p: int) -> np.ndarray:
    """Vallee Poussin multipliers lambda_0..lambda_{n-1}.

    Equal to 1 up to k = n-p, then decreasing linearly as 1 - (k-n+p)/p.
    """
    _check_np(n, p)
    k = np.arange(n, dtype=float)
    lam = np.ones(n)
    tail = k >= n - p + 1
    lam[tail] = 1.0 - (k[tail] - n + p) / p
    return lam


def apply_multipliers(f: TrigPolynomial, lam: np.ndarray) -> TrigPolynomial:
    """Harmonic-wise product with ``lam``; harmonics beyond len(lam) are dropped."""
    out = f.multiplied(lam)
    return partial_sum(out, max(len(lam) - 1, 0))


def vp_sum(f: TrigPolynomial, n: int, p: int) -> TrigPolynomial:
    """Vallee Poussin sum V_{n,p}(f) = (1/p) sum_{k=n-p}^{n-1} S_k(f)."""
    return apply_multipliers(f, vp_multipliers(n, p))


def fejer_sum(f: TrigPolynomial, n: int) -> TrigPolynomial:
    return vp_sum(f, n, n)


def rho_polynomial(f: TrigPolynomial, n: int, p: int) -> TrigPolynomial:
    """f - V_{n,p}(f), formed harmonic-wise as (1 - lambda_k) so tiny deviations keep full relative accuracy."""
    lam = vp_multipliers(n, p)
    w = np.ones(max(f.order, n - 1) + 1)
    w[:n] = 1.0 - lam
    return f.multiplied(w)


def deviation_rho(f: TrigPolynomial, n: int, p: int, g: Optional[UniformGrid] = None):
    """Samples of rho_{n,p}(f) = f - V_{n,p}(f) on ``g`` and their (refined) sup norm."""
    g = g or UniformGrid.default_for(f.order)
    if not g.resolves(f.order):
        raise ValueError(f"grid too coarse: M={g.M} for order {f.order}")
    rho = rho_polynomial(f, n, p)
    sampled = eval_poly(rho, g)
    return sampled, sup_norm(sampled)
