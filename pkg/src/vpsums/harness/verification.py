"""Built-in self-check suite: named checks with measured values and tolerances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List

import numpy as np

from ..best_approx import best_approx_C, best_approx_L2, best_approx_Ls, verify_zero_best
from ..extremal import (
    ExtremalSpec,
    alpha_offset,
    build_phi,
    build_phi0,
    build_phi_delta,
    select_sign,
    telyakovskii_integral,
)
from ..interpolation import discrete_coeffs, interp_nodes
from ..psi_calculus import make_psi, tau_sum, tau_sum_direct, tau_sum_piecewise, truncated_kernel_polynomial
from ..trig_core import (
    NormIndex,
    TrigPolynomial,
    UniformGrid,
    cos_norm,
    eval_poly,
    norm,
    partial_sum,
    vp_multipliers,
)
from .config import ExperimentConfig, PhiConfig, PsiConfig, default_config
from .experiment import sweep


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"[{flag}] {self.name}: measured {self.value:.3e}, tolerance {self.tolerance:.1e}{extra}"


@dataclass
class VerificationSummary:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def format(self) -> str:
        lines = [c.line() for c in self.checks]
        lines.append(f"{sum(c.passed for c in self.checks)}/{len(self.checks)} checks passed")
        return "\n".join(lines)


def _random_poly(rng: np.random.Generator, order: int) -> TrigPolynomial:
    return TrigPolynomial(rng.standard_normal(order + 1), rng.standard_normal(order))


def check_multiplier_identity(n_max: int, rng: np.random.Generator, perturbation: float = 0.0) -> CheckResult:
    """lambda-weighted sum against the literal average of partial sums S_{n-p}..S_{n-1}."""
    worst = 0.0
    for n in range(1, n_max + 1):
        f = _random_poly(rng, n + 4)
        for p in range(1, n + 1):
            lam = vp_multipliers(n, p) + perturbation
            via_lambda = partial_sum(f.multiplied(lam), n - 1)
            avg = TrigPolynomial.zero()
            for k in range(n - p, n):
                avg = avg + partial_sum(f, k)
            avg = avg.scaled(1.0 / p)
            d = via_lambda - avg
            worst = max(worst, float(np.max(np.abs(np.concatenate([d.a, d.b])))))
    return CheckResult("multiplier_identity", worst <= 1e-12, worst, 1e-12, f"n <= {n_max}, all p")


def check_interpolation(rng: np.random.Generator) -> List[CheckResult]:
    worst = 0.0
    for n in range(1, 9):
        t = _random_poly(rng, n - 1)
        d = discrete_coeffs(t(interp_nodes(n)), n)
        worst = max(worst, float(np.max(np.abs(d.a[:n] - t.a))), float(np.max(np.abs(d.b[: n - 1] - t.b), initial=0.0)))
    exact = CheckResult("interpolation_exactness", worst <= 1e-12, worst, 1e-12, "orders <= n-1, n <= 8")
    mismatches = 0
    for n in range(1, 9):
        N = 2 * n - 1
        x = interp_nodes(n)
        for q in range(0, 41):
            d = discrete_coeffs(np.cos(q * x), n)
            expect = np.zeros(n)
            r = q % N
            alias = r if r <= n - 1 else N - r
            expect[alias] = 2.0 if alias == 0 else 1.0
            if np.max(np.abs(d.a[:n] - expect)) > 1e-12 or np.any(np.abs(d.b[: n - 1]) > 1e-12):
                mismatches += 1
    alias = CheckResult("aliasing_rule", mismatches == 0, float(mismatches), 0.0, "cos(qx), q <= 40, n <= 8")
    return [exact, alias]


def check_kernel_orthogonality(rng: np.random.Generator, cfg: ExperimentConfig, trials: int) -> CheckResult:
    worst = 0.0
    for fam in cfg.psi:
        w = fam.build("alternating")
        for n in cfg.n_values:
            for p in cfg.p_values:
                if p > n:
                    continue
                psi2 = truncated_kernel_polynomial(w, n, p, 2)
                n2 = math.sqrt(math.pi * (psi2.a[0] ** 2 / 2.0 + np.sum(psi2.a[1:] ** 2) + np.sum(psi2.b**2)))
                for _ in range(trials):
                    t = _random_poly(rng, n - p)
                    tp = t.padded(psi2.order)
                    inner = math.pi * (psi2.a[0] * tp.a[0] / 2.0 + np.dot(psi2.a[1:], tp.a[1:]) + np.dot(psi2.b, tp.b))
                    nt = math.sqrt(math.pi * (t.a[0] ** 2 / 2.0 + np.sum(t.a[1:] ** 2) + np.sum(t.b**2)))
                    worst = max(worst, abs(inner) / (n2 * nt))
    return CheckResult("kernel_orthogonality", worst <= 1e-8, worst, 1e-8, "relative inner product")


def check_tau_sums(cfg: ExperimentConfig) -> List[CheckResult]:
    worst = 0.0
    violations = 0
    for fam in cfg.psi:
        w = fam.build()
        for n in range(1, 21):
            for p in range(1, n + 1):
                for j in (1, 2, 3):
                    a, b = tau_sum_piecewise(w, n, p, j), tau_sum_direct(w, n, p, j)
                    worst = max(worst, abs(a - b) / max(1.0, abs(b)))
                    val, bound = tau_sum(w, n, p, j)
                    violations += val > bound
    return [
        CheckResult("tau_sum_identity", worst <= 1e-15, worst, 1e-15, "n <= 20, all p, j in 1..3"),
        CheckResult("tau_sum_min_bound", violations == 0, float(violations), 0.0, "value <= min-form bound"),
    ]


def check_sweep(cfg: ExperimentConfig) -> List[CheckResult]:
    rows = sweep(cfg)
    errors = [r for r in rows if not r.ok]
    good = [r for r in rows if r.ok]
    tol = cfg.tolerances
    margin = min((r.explicit_margin for r in good), default=math.inf)
    gap = max((r.interp_gap for r in good), default=0.0)
    imargin = min((r.interp_margin for r in good), default=math.inf)
    return [
        CheckResult("sweep_rows_ok", not errors, float(len(errors)), 0.0, f"{len(rows)} rows"),
        CheckResult("explicit_T1_inequality", margin >= -tol.explicit_slack, margin, -tol.explicit_slack,
                    "min relative margin over random sweep"),
        CheckResult("interpolation_gap", gap <= tol.gap_ceiling, gap, tol.gap_ceiling, "max over sweep"),
        CheckResult("interpolation_explicit", imargin >= -tol.explicit_slack, imargin, -tol.explicit_slack,
                    "min relative margin with measured gap"),
    ]


def check_extremal(g: UniformGrid) -> List[CheckResult]:
    nerr = serr = ierr = 0.0
    zero_best = True
    for s in (1.5, 2.0, 3.0, 4.0):
        idx = NormIndex(s)
        for m in (1, 3, 6):
            for beta in (0.0, 1.0, 0.5):
                spec = ExtremalSpec("phi_eq21", m, beta, 1.0, s=idx)
                phi = build_phi(spec, g)
                nerr = max(nerr, abs(norm(phi, idx) - 1.0))
                serr = max(serr, abs(best_approx_Ls(phi, m, idx).E - 1.0))
                zero_best &= verify_zero_best(phi, m, idx)
                _, plus, minus = select_sign(spec, g)
                ierr = max(ierr, abs(max(plus, minus) - cos_norm(idx.conj)))
    return [
        CheckResult("extremal_norm", nerr <= 1e-8, nerr, 1e-8),
        CheckResult("extremal_best_approx", serr <= 1e-6, serr, 1e-6),
        CheckResult("extremal_zero_best", zero_best, float(not zero_best), 0.0),
        CheckResult("extremal_dual_integral", ierr <= 1e-6, ierr, 1e-6),
    ]


def check_phi_delta(g: UniformGrid) -> List[CheckResult]:
    remez = bracket = 0.0
    area_ok = True
    for m in (1, 3, 6, 12):
        for beta in (0.0, 1.0, 0.5):
            delta = 0.25 * math.pi / (2 * m)
            spec = ExtremalSpec("phi_delta", m, beta, 1.0, delta=delta)
            pd = build_phi_delta(spec, g)
            remez = max(remez, abs(best_approx_C(pd, m).E - norm(pd, NormIndex.infinity())))
            p0 = build_phi0(ExtremalSpec("phi0", m, beta, 1.0), g).evaluator
            gamma = 0.1
            val = p0.integral_against_cos(m, beta * math.pi / 2.0) + 2 * gamma * p0.integral_against_cos(m + 1, 0.3)
            bracket = max(bracket, abs(val - 4.0))
            area_ok &= (pd.evaluator - p0).abs_integral() <= 6 * m * delta * (1 + 1e-12)
    return [
        CheckResult("phi_delta_remez", remez <= 1e-6, remez, 1e-6),
        CheckResult("phi0_bracket", bracket <= 1e-10, bracket, 1e-10),
        CheckResult("phi_delta_area", area_ok, float(not area_ok), 0.0),
    ]


def check_telyakovskii() -> List[CheckResult]:
    low = math.inf
    worst = 0.0
    for m in (3, 6, 12):
        for gamma in (0.05, 0.1, 0.2):
            for alpha in np.linspace(-math.pi, math.pi, 16, endpoint=False):
                val = telyakovskii_integral(m, gamma, float(alpha))
                low = min(low, val)
                worst = max(worst, (val - 4.0) / gamma**2)
    return [
        CheckResult("telyakovskii_lower", low >= 4.0 - 1e-6, low, 4.0 - 1e-6),
        CheckResult("telyakovskii_remainder", worst <= 20.0, worst, 20.0, "sup (I - 4)/gamma^2"),
    ]


def check_sharpness(grid_size: int) -> CheckResult:
    base = ExperimentConfig(
        psi=(PsiConfig("q_pow_k_squared", 0.5, 24),), beta_mode="cycle",
        s=(NormIndex(2.0), NormIndex.infinity()), n_values=tuple(range(4, 13)), p_values=(1, 2, 3),
        phi=PhiConfig(kind="extremal"), grid_size=grid_size,
    )
    w = base.psi[0].build()
    worst = 0.0
    failures = 0
    for r in sweep(base):
        m = r.n - r.p + 1
        if not r.ok:
            failures += 1
            continue
        if m == 4:
            failures += not 0.5 <= r.sharpness_ratio <= 1.5
        elif m >= 6:
            eta = 10 * w.psi_at(m + 1) / w.psi_at(m) * r.p
            failures += abs(r.sharpness_ratio - 1.0) > eta
        worst = max(worst, abs(r.sharpness_ratio - 1.0))
    return CheckResult("sharpness_trend", failures == 0, worst, 0.5, f"{failures} cells out of band")


def check_solvers(rng: np.random.Generator, g: UniformGrid, cases: int) -> CheckResult:
    worst = 0.0
    for _ in range(cases):
        order = int(rng.integers(2, 17))
        m = int(rng.integers(1, order + 1))
        t = _random_poly(rng, order)
        e2 = best_approx_L2(t, m).E
        es = best_approx_Ls(eval_poly(t, g), m, NormIndex(2.0)).E
        worst = max(worst, abs(e2 - es))
    return CheckResult("solver_cross_validation", worst <= 1e-7, worst, 1e-7, f"{cases} random cases")


def check_alpha() -> CheckResult:
    w = make_psi("q_pow_k_squared", 24, q=0.5).with_beta(np.ones(24))
    val = alpha_offset(w, 4, 1)
    err = abs(val + math.pi / 8.0)
    return CheckResult("alpha_offset", err <= 1e-15, err, 1e-15, "beta = 1, m = 4")


def verify_suite(quick: bool = False, multiplier_perturbation: float = 0.0, seed: int = 20240515,
                 grid_size: int = 4096, progress: Callable[[CheckResult], None] = None) -> VerificationSummary:
    """Run every named check; ``multiplier_perturbation`` is a mutation hook for the identity check."""
    rng = np.random.default_rng(seed)
    g = UniformGrid(grid_size)
    cfg = default_config().replace(grid_size=grid_size)
    if quick:
        cfg = cfg.replace(n_values=(4, 6, 8), phi=PhiConfig(reps=2))
    summary = VerificationSummary()

    def add(results):
        for r in results if isinstance(results, list) else [results]:
            summary.checks.append(r)
            if progress is not None:
                progress(r)

    add(check_multiplier_identity(12 if quick else 32, rng, multiplier_perturbation))
    add(check_interpolation(rng))
    add(check_kernel_orthogonality(rng, cfg, 10 if quick else 100))
    add(check_tau_sums(cfg))
    add(check_sweep(cfg))
    add(check_extremal(g))
    add(check_phi_delta(g))
    add(check_telyakovskii())
    add(check_sharpness(grid_size))
    add(check_solvers(rng, g, 40 if quick else 200))
    add(check_alpha())
    return summary
