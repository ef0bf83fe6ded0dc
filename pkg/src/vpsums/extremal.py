"""Functions that make the leading term of the deviation bounds attained.

Three constructions share the phase theta = beta_m*pi/2 and the frequency m:

* a power-sign cosine ``E c |cos(mt + theta)|^(s'-1) sign cos(mt + theta)``,
  extremal for the L_s bound with 1 < s < inf;
* the sign function ``E sign cos(mt + theta)``;
* its continuous piecewise-linear mollification, extremal in C.

Every construction carries an exact evaluator, its breakpoints and exact
Fourier coefficients, so integrals against them need no grid quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import optimize, special

from .psi_calculus import PsiBetaWeight, psi_integral
from .trig_core import (
    NormIndex,
    SampledFunction,
    TrigPolynomial,
    UniformGrid,
    cos_norm,
    fourier_analyze,
    integrate_periodic,
)

TWO_PI = 2.0 * math.pi
KINDS = ("phi_eq21", "phi0", "phi_delta")


def _wrap(t, start: float) -> np.ndarray:
    return np.mod(np.asarray(t, dtype=float) - start, TWO_PI) + start


def _sinc(z: np.ndarray) -> np.ndarray:
    return np.sinc(z / math.pi)


def _odd_kernel(z: np.ndarray) -> np.ndarray:
    """(sin z - z cos z)/z^2, by its Taylor series near 0."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 0.1
    zs = z[small]
    z2 = zs * zs
    out[small] = zs * (1.0 / 3.0 - z2 * (1.0 / 30.0 - z2 * (1.0 / 840.0 - z2 * (1.0 / 45360.0 - z2 / 3991680.0))))
    zl = z[~small]
    out[~small] = (np.sin(zl) - zl * np.cos(zl)) / zl**2
    return out


class PowerSignCos:
    """t -> amp * |cos(m t + theta)|^a * sign cos(m t + theta), a >= 0.

    The profile u -> |cos u|^a sign cos u is even and changes sign under
    u -> u + pi, so only odd harmonics j appear, each with a closed-form
    coefficient; in t they sit at frequencies j*m.
    """

    def __init__(self, m: int, theta: float, a: float, amp: float):
        if m < 1 or a < 0.0:
            raise ValueError("need m >= 1 and a >= 0")
        self.m, self.theta, self.a, self.amp = int(m), float(theta), float(a), float(amp)
        k = np.arange(2 * self.m)
        self.breakpoints = _wrap(((2 * k + 1) * math.pi / 2.0 - self.theta) / self.m, -math.pi)

    def __call__(self, t):
        c = np.cos(self.m * np.asarray(t, dtype=float) + self.theta)
        if self.a == 0.0:
            return self.amp * np.sign(c)
        return self.amp * np.abs(c) ** self.a * np.sign(c)

    def profile_coefficient(self, j: int) -> float:
        """(1/pi) int |cos u|^a sign(cos u) cos(j u) du over one period."""
        if j % 2 == 0:
            return 0.0
        a = self.a
        half = math.pi * special.gamma(a + 1.0) / 2.0**a
        half *= special.rgamma(1.0 + (a + j) / 2.0) * special.rgamma(1.0 + (a - j) / 2.0)
        return 2.0 / math.pi * float(half)

    def coefficients(self, K: int) -> TrigPolynomial:
        """Exact Fourier coefficients up to order K."""
        a = np.zeros(K + 1)
        b = np.zeros(K)
        for j in range(1, K // self.m + 1, 2):
            c = self.amp * self.profile_coefficient(j)
            a[j * self.m] = c * math.cos(j * self.theta)
            b[j * self.m - 1] = -c * math.sin(j * self.theta)
        return TrigPolynomial(a, b)


class PiecewiseLinear:
    """Periodic function that is linear on each segment [x_i, x_{i+1}).

    ``left[i]``/``right[i]`` are the limits at the two ends of segment i, so
    jumps at knots are allowed. Knots cover one period starting at x_0.
    """

    def __init__(self, knots, left, right):
        x = np.asarray(knots, dtype=float)
        if x.ndim != 1 or x.size < 1 or np.any(np.diff(x) <= 0.0) or x[-1] - x[0] >= TWO_PI:
            raise ValueError("knots must be strictly increasing within one period")
        self.knots = x
        self.left = np.asarray(left, dtype=float)
        self.right = np.asarray(right, dtype=float)
        if self.left.shape != x.shape or self.right.shape != x.shape:
            raise ValueError("need one left and one right value per segment")
        self.ends = np.append(x[1:], x[0] + TWO_PI)
        self.slopes = (self.right - self.left) / (self.ends - x)
        self.breakpoints = x.copy()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        u = _wrap(t, self.knots[0])
        i = np.clip(np.searchsorted(self.knots, u, side="right") - 1, 0, self.knots.size - 1)
        return self.left[i] + self.slopes[i] * (u - self.knots[i])

    def complex_moment(self, k: int) -> complex:
        """int f(t) e^{ikt} dt over one period, exactly.

        Each segment is expanded about its midpoint c with half-length h:
        f = mean + half_jump * u/h, and
        int_{-h}^{h} (mean + half_jump u/h) e^{ik(c+u)} du
            = 2h e^{ikc} [mean sinc(kh) + i half_jump g(kh)],
        g(z) = (sin z - z cos z)/z^2. This stays accurate for segments far
        shorter than 1/k, where the textbook antiderivative cancels.
        """
        h = 0.5 * (self.ends - self.knots)
        c = self.knots + h
        mean = 0.5 * (self.left + self.right)
        half_jump = 0.5 * (self.right - self.left)
        z = k * h
        terms = 2.0 * h * np.exp(1j * k * c) * (mean * _sinc(z) + 1j * half_jump * _odd_kernel(z))
        return complex(math.fsum(terms.real), math.fsum(terms.imag))

    def integral_against_cos(self, k: int, phase: float) -> float:
        """int f(t) cos(k t + phase) dt, exactly."""
        return float((np.exp(1j * phase) * self.complex_moment(k)).real)

    def coefficients(self, K: int) -> TrigPolynomial:
        C = np.array([self.complex_moment(k) for k in range(K + 1)])
        return TrigPolynomial(C.real / math.pi, C.imag[1:] / math.pi)

    def abs_integral(self) -> float:
        """int |f| over one period, exactly (each segment split at its zero)."""
        total = []
        for l, r, x0, x1 in zip(self.left, self.right, self.knots, self.ends):
            L = x1 - x0
            if l * r >= 0.0:
                total.append(0.5 * (abs(l) + abs(r)) * L)
            else:
                total.append(0.5 * (l * l + r * r) / (abs(l) + abs(r)) * L)
        return math.fsum(total)

    def __sub__(self, other: "PiecewiseLinear") -> "PiecewiseLinear":
        start = min(self.knots[0], other.knots[0])
        x = np.unique(np.concatenate([_wrap(self.knots, start), _wrap(other.knots, start)]))
        ends = np.append(x[1:], x[0] + TWO_PI)
        # evaluate each piece just inside its ends so jumps are represented
        eps = 1e-9 * (ends - x)
        left = self._inside(x, x + eps) - other._inside(x, x + eps)
        right = self._inside(ends, ends - eps) - other._inside(ends, ends - eps)
        return PiecewiseLinear(x, left, right)

    def _inside(self, at, probe):
        """Linear extension of the segment containing ``probe`` evaluated at ``at``."""
        u = _wrap(probe, self.knots[0])
        i = np.clip(np.searchsorted(self.knots, u, side="right") - 1, 0, self.knots.size - 1)
        offset = np.asarray(at) - np.asarray(probe)
        return self.left[i] + self.slopes[i] * (u + offset - self.knots[i])


@dataclass(frozen=True)
class ExtremalSpec:
    """Parameters of one construction.

    ``sign`` picks the phase +beta_m*pi/2 (default) or -beta_m*pi/2 inside the
    cosine; :func:`select_sign` decides it numerically.
    """

    kind: str
    m: int
    beta_m: float
    E: float
    s: Optional[NormIndex] = None
    delta: Optional[float] = None
    sign: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown construction {self.kind!r}; expected one of {KINDS}")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not self.E > 0.0:
            raise ValueError("E must be positive")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.kind == "phi_eq21":
            if self.s is None or self.s.is_inf or self.s.value <= 1.0:
                raise ValueError("the power-sign construction needs 1 < s < inf")
        if self.kind == "phi_delta":
            if self.delta is None or not 0.0 < self.delta < math.pi / (2 * self.m):
                raise ValueError(f"delta must lie in (0, pi/(2m)) = (0, {math.pi / (2 * self.m):.6g})")

    @property
    def theta(self) -> float:
        return self.sign * self.beta_m * math.pi / 2.0

    def jump_points(self) -> np.ndarray:
        """Zeros t_k of cos(m t + theta), k = 0..2m-1, wrapped into [-pi, pi)."""
        k = np.arange(2 * self.m)
        return np.sort(_wrap(((2 * k + 1) * math.pi / 2.0 - self.theta) / self.m, -math.pi))

    def peak_points(self) -> np.ndarray:
        """Points tau_k where cos(m t + theta) = (-1)^k, k = 0..2m-1 (not wrapped)."""
        k = np.arange(2 * self.m)
        return (k * math.pi - self.theta) / self.m


def _sign_function(spec: ExtremalSpec) -> PiecewiseLinear:
    t = spec.jump_points()
    mid = 0.5 * (t + np.append(t[1:], t[0] + TWO_PI))
    v = spec.E * np.sign(np.cos(spec.m * mid + spec.theta))
    return PiecewiseLinear(t, v, v)


def _mollified(spec: ExtremalSpec) -> PiecewiseLinear:
    t = spec.jump_points()
    d = spec.delta
    knots = np.sort(np.concatenate([t - d, t + d]))
    start = knots[0]
    knots = np.sort(_wrap(knots, start))
    if np.any(np.diff(knots) <= 0.0):
        raise ValueError(f"delta={d:.3g} is below the floating-point resolution of the knots")
    ends = np.append(knots[1:], knots[0] + TWO_PI)
    mid = 0.5 * (knots + ends)
    in_ramp = np.min(np.abs(_wrap(mid[:, None] - t[None, :], -math.pi)), axis=1) < d
    val0 = spec.E * np.sign(np.cos(spec.m * mid + spec.theta))
    left = np.empty_like(mid)
    right = np.empty_like(mid)
    for i, ramp in enumerate(in_ramp):
        if ramp:
            # from the plateau before the jump to the plateau after it
            left[i], right[i] = val0[i - 1], val0[(i + 1) % mid.size]
        else:
            left[i] = right[i] = val0[i]
    return PiecewiseLinear(knots, left, right)


def build_phi(spec: ExtremalSpec, grid: UniformGrid) -> SampledFunction:
    """Power-sign cosine with L_s norm E and int phi*cos(mt + theta) = ||cos||_{s'} E."""
    if spec.kind != "phi_eq21":
        raise ValueError(f"build_phi needs kind 'phi_eq21', got {spec.kind!r}")
    sc = spec.s.conj
    sp = sc.value
    amp = cos_norm(sc) ** (1.0 - sp) * spec.E
    return SampledFunction.from_evaluator(PowerSignCos(spec.m, spec.theta, sp - 1.0, amp), grid)


def build_phi0(spec: ExtremalSpec, grid: UniformGrid) -> SampledFunction:
    """E * sign cos(m t + theta), jumps at the zeros of the cosine."""
    if spec.kind != "phi0":
        raise ValueError(f"build_phi0 needs kind 'phi0', got {spec.kind!r}")
    return SampledFunction.from_evaluator(_sign_function(spec), grid)


def build_phi_delta(spec: ExtremalSpec, grid: UniformGrid) -> SampledFunction:
    """The sign function with each jump replaced by a line over (t_k - delta, t_k + delta)."""
    if spec.kind != "phi_delta":
        raise ValueError(f"build_phi_delta needs kind 'phi_delta', got {spec.kind!r}")
    return SampledFunction.from_evaluator(_mollified(spec), grid)


def build(spec: ExtremalSpec, grid: UniformGrid) -> SampledFunction:
    return {"phi_eq21": build_phi, "phi0": build_phi0, "phi_delta": build_phi_delta}[spec.kind](spec, grid)


def select_sign(spec: ExtremalSpec, grid: UniformGrid) -> Tuple[int, float, float]:
    """Choose the phase sign of the test cosine for the constructed function.

    Returns ``(sign, |int phi cos(mt + theta)|, |int phi cos(mt - theta)|)``
    where ``sign`` maximises the integral (ties go to +). Integrals use
    piecewise adaptive quadrature split at the breakpoints.
    """
    phi = build(spec, grid)
    ev = phi.evaluator
    theta = spec.beta_m * math.pi / 2.0
    vals = []
    for sg in (1, -1):
        vals.append(abs(integrate_periodic(
            lambda t, sg=sg: float(ev(t)) * math.cos(spec.m * t + sg * theta), ev.breakpoints)))
    plus, minus = vals
    return (1 if plus >= minus * (1.0 - 1e-12) else -1), plus, minus


def _psi_ratio(w: PsiBetaWeight, m: int) -> float:
    if m + 1 > w.K_max:
        raise ValueError(f"need m + 1 <= K_max, got m={m}, K_max={w.K_max}")
    return w.psi_at(m + 1) / w.psi_at(m)


def default_delta(w: PsiBetaWeight, n: int, p: int) -> float:
    """Half of the admissible budget (1/m) (psi(m+1)/psi(m))^2, m = n - p + 1."""
    m = n - p + 1
    ratio = _psi_ratio(w, m)
    if not ratio < 1.0:
        raise ValueError(f"psi(m+1)/psi(m) = {ratio:.3g} must be < 1")
    return 0.5 / m * ratio**2


def alpha_offset(w: PsiBetaWeight, n: int, p: int) -> float:
    """beta_{m+1} pi/2 - (m+1)/m * beta_m pi/2 with m = n - p + 1."""
    m = n - p + 1
    return w.beta_at(m + 1) * math.pi / 2.0 - (m + 1) / m * w.beta_at(m) * math.pi / 2.0


def telyakovskii_integral(m: int, gamma: float, alpha: float, g: Optional[UniformGrid] = None) -> float:
    """int_{-pi}^{pi} |cos mt + 2 gamma cos((m+1)t + alpha)| dt.

    Sign changes are bracketed on ``g`` and refined by root finding; between
    roots the integrand has a closed-form antiderivative.
    """
    if gamma < 0.0:
        raise ValueError("gamma must be >= 0")
    g = g or UniformGrid(max(4096, 64 * (m + 2)))

    def h(t):
        return np.cos(m * t) + 2.0 * gamma * np.cos((m + 1) * t + alpha)

    def prim(t):
        return math.sin(m * t) / m + 2.0 * gamma * math.sin((m + 1) * t + alpha) / (m + 1)

    x = g.points - math.pi
    x = np.append(x, math.pi)
    v = h(x)
    roots = []
    for i in np.nonzero(v[:-1] * v[1:] < 0.0)[0]:
        roots.append(optimize.brentq(h, x[i], x[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    roots += [x[i] for i in np.nonzero(v[:-1] == 0.0)[0]]
    edges = np.unique(np.concatenate([[-math.pi], roots, [math.pi]]))
    parts = [abs(prim(b) - prim(a)) for a, b in zip(edges[:-1], edges[1:])]
    return math.fsum(parts)


def build_extremal_F(w: PsiBetaWeight, phi: SampledFunction, K: int, exact: bool = True) -> TrigPolynomial:
    """J^psi_beta of the order-K truncation of ``phi``.

    With ``exact`` and an evaluator that knows its Fourier coefficients those
    are used; otherwise the coefficients come from the grid samples.
    """
    if K > w.K_max:
        raise ValueError(f"K={K} exceeds K_max={w.K_max}")
    coef = getattr(phi.evaluator, "coefficients", None)
    trunc = coef(K) if exact and coef is not None else fourier_analyze(phi, K)
    return psi_integral(trunc, w)
