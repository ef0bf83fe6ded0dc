"""Single experiment cells, sweeps over them and report serialisation.

A cell fixes psi, beta, s, n, p and a derivative phi. The function under
study is f = J^psi_beta phi, so E_m(f^psi_beta) is computed on phi itself
and no numerical differentiation is ever needed.
"""

from __future__ import annotations

import csv
import io
import json
import math
import zlib
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..best_approx import ConvergenceError, best_approx_C, best_approx_L2, best_approx_Ls
from ..extremal import ExtremalSpec, build_extremal_F, build_phi, build_phi_delta, default_delta
from ..interpolation import deviation_rho_tilde, interp_vp_of
from ..psi_calculus import PsiBetaWeight, psi_integral
from ..trig_core import (
    NormIndex,
    SampledFunction,
    TrigPolynomial,
    UniformGrid,
    deviation_rho,
    eval_poly,
    norm,
    partial_sum,
    sup_norm,
)
from .bounds import BoundBreakdown, bound_rhs
from .config import ExperimentConfig, PsiConfig

CSV_HEADER = (
    "family", "s", "n", "p", "E", "rho_sup", "rho_tilde_sup", "leading", "remainder",
    "explicit_rhs", "sharpness_ratio", "interp_gap", "status",
)
# E below this (relative to the size of phi) means phi already has order <= n-p
DEGENERATE_RTOL = 1e-12
# Smallest ramp half-width whose knots stay distinct in double precision; the
# mollification changes the leading coefficient only by a factor sinc(m*delta).
MIN_DELTA = 1e-12


@dataclass(frozen=True)
class DeviationReport:
    """Measured deviations of one cell against its bound.

    ``explicit_margin`` is (explicit_rhs - rho_sup)/explicit_rhs; the
    interpolation bound adds the measured ||rho~ - rho||_C to the same
    explicit right-hand side.
    """

    family: str
    s: str
    n: int
    p: int
    beta_mode: str
    phi_kind: str
    rep: int
    seed: int
    E: float
    rho_sup: float
    rho_tilde_sup: float
    bound: Optional[BoundBreakdown]
    sharpness_ratio: float
    interp_gap: float
    empirical_constant: float
    explicit_margin: float
    interp_theorem: str
    interp_rhs: float
    interp_margin: float
    degenerate: bool
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return not self.status.startswith("error")

    def as_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["bound"] = None if self.bound is None else asdict(self.bound)
        return d


def error_report(fam: PsiConfig, s: NormIndex, n: int, p: int, rep: int, seed: int,
                 beta_mode: str, phi_kind: str, exc: BaseException) -> DeviationReport:
    nan = math.nan
    return DeviationReport(fam.label, s.label, n, p, beta_mode, phi_kind, rep, seed, nan, nan, nan, None,
                           nan, nan, nan, nan, "", nan, nan, False, f"error: {exc}")


def cell_rng(seed: int, family: str, s: NormIndex, n: int, p: int, rep: int) -> np.random.Generator:
    """Independent stream per cell, reproducible from the base seed."""
    tag = zlib.crc32(f"{family}|{s.label}".encode())
    return np.random.default_rng([seed, n, p, rep, tag])


def random_phi(rng: np.random.Generator, order: int, idx: NormIndex, g: UniformGrid) -> TrigPolynomial:
    """Normal coefficients up to ``order``, zero mean, unit L_s norm on ``g``."""
    if order < 1:
        return TrigPolynomial.zero()
    a = np.concatenate([[0.0], rng.standard_normal(order)])
    b = rng.standard_normal(order)
    poly = TrigPolynomial(a, b)
    return poly.scaled(1.0 / norm(eval_poly(poly, g), idx))


def best_E(phi: SampledFunction, m: int, idx: NormIndex, poly: Optional[TrigPolynomial] = None) -> float:
    if idx.is_inf:
        return best_approx_C(phi, m).E
    if idx.value == 2.0 and poly is not None:
        return best_approx_L2(poly, m).E
    return best_approx_Ls(phi, m, idx).E


def _relative_margin(rhs: float, value: float) -> float:
    return (rhs - value) / rhs if rhs > 0.0 else -value


def run_case(
    w: PsiBetaWeight,
    idx: NormIndex,
    n: int,
    p: int,
    phi_kind: str = "random",
    *,
    grid: Optional[UniformGrid] = None,
    rng: Optional[np.random.Generator] = None,
    extra_order: int = 4,
    E_target: float = 1.0,
    family: Optional[str] = None,
    beta_mode: str = "",
    rep: int = 0,
    seed: int = 0,
) -> DeviationReport:
    """Build f = J^psi_beta phi and compare ||rho||, ||rho~|| with the bounds."""
    if not 1 <= p <= n:
        raise ValueError(f"parameter range: need 1 <= p <= n, got n={n}, p={p}")
    m = n - p + 1
    g = grid or UniformGrid(4096)
    rng = rng if rng is not None else np.random.default_rng(seed)

    poly: Optional[TrigPolynomial] = None
    if phi_kind in ("random", "low_order"):
        order = n + extra_order if phi_kind == "random" else n - p
        if order > w.K_max:
            raise ValueError(f"phi order {order} exceeds K_max={w.K_max}")
        poly = random_phi(rng, order, idx, g)
        phi = eval_poly(poly, g)
        F = psi_integral(poly, w)
    elif phi_kind == "harmonic":
        poly = TrigPolynomial.cosine(m, E_target)
        phi = eval_poly(poly, g)
        F = psi_integral(poly, w)
    elif phi_kind == "extremal":
        if idx.is_inf:
            spec = ExtremalSpec("phi_delta", m, w.beta_at(m), E_target, delta=max(default_delta(w, n, p), MIN_DELTA))
            phi = build_phi_delta(spec, g)
        else:
            spec = ExtremalSpec("phi_eq21", m, w.beta_at(m), E_target, s=idx)
            phi = build_phi(spec, g)
        F = build_extremal_F(w, phi, w.K_max)
    else:
        raise ValueError(f"unknown phi kind {phi_kind!r}")

    E = best_E(phi, m, idx, poly)
    scale = float(np.max(np.abs(phi.values)))
    degenerate = E <= DEGENERATE_RTOL * max(scale, 1e-300)
    if degenerate:
        E = 0.0

    dev_grid = UniformGrid.default_for(F.order)
    _, rho_sup = deviation_rho(F, n, p, dev_grid)
    _, rho_tilde_sup = deviation_rho_tilde(F, n, p, dev_grid)
    # rho~ - rho = -V~(high part of F): only the part of order >= n reaches the nodes
    high = F - partial_sum(F, n - 1)
    gap_poly = interp_vp_of(high, n, p) if high.order >= n else TrigPolynomial.zero()
    gap = sup_norm(eval_poly(gap_poly, dev_grid))

    theorem = "T2" if idx.is_inf else "T1"
    bound = bound_rhs(theorem, w, n, p, idx, E)
    interp_theorem = ("T4" if idx.is_inf else "T3") if p >= 2 else theorem
    interp_bound = bound_rhs(interp_theorem, w, n, p, idx, E)
    interp_rhs = interp_bound.explicit_rhs + gap

    lead_E = bound.leading * E
    if degenerate:
        ratio = emp = interp_gap = 0.0
    else:
        ratio = rho_sup / lead_E
        emp = abs(rho_sup - lead_E) / (bound.remainder * E)
        interp_gap = gap / (E * w.tail_sum(n))
    return DeviationReport(
        family=family or w.family,
        s=idx.label,
        n=n,
        p=p,
        beta_mode=beta_mode,
        phi_kind=phi_kind,
        rep=rep,
        seed=seed,
        E=E,
        rho_sup=rho_sup,
        rho_tilde_sup=rho_tilde_sup,
        bound=bound,
        sharpness_ratio=ratio,
        interp_gap=interp_gap,
        empirical_constant=emp,
        explicit_margin=_relative_margin(bound.explicit_rhs, rho_sup),
        interp_theorem=interp_theorem,
        interp_rhs=interp_rhs,
        interp_margin=_relative_margin(interp_rhs, rho_tilde_sup),
        degenerate=degenerate,
        status="degenerate" if degenerate else "ok",
    )


def run_cell(cfg: ExperimentConfig, fam: PsiConfig, idx: NormIndex, n: int, p: int, rep: int) -> DeviationReport:
    """One row of a sweep; failures become error rows instead of exceptions."""
    beta_mode = cfg.beta_for(n, p, rep)
    seed = cfg.phi_seed
    try:
        w = fam.build(beta_mode, cfg.beta_value)
        return run_case(
            w, idx, n, p, cfg.phi.kind,
            grid=UniformGrid(cfg.grid_size),
            rng=cell_rng(seed, fam.label, idx, n, p, rep),
            extra_order=cfg.phi.extra_order,
            E_target=cfg.phi.E,
            family=fam.label,
            beta_mode=beta_mode,
            rep=rep,
            seed=seed,
        )
    except (ValueError, ConvergenceError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return error_report(fam, idx, n, p, rep, seed, beta_mode, cfg.phi.kind, exc)


def sweep(cfg: ExperimentConfig) -> List[DeviationReport]:
    """All cells of ``cfg`` in order family, s, n, p, rep."""
    return [run_cell(cfg, *cell) for cell in cfg.cells()]


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def report_row(r: DeviationReport) -> List[str]:
    b = r.bound
    nan = math.nan
    values = (
        r.family, r.s, r.n, r.p, r.E, r.rho_sup, r.rho_tilde_sup,
        b.leading if b else nan, b.remainder if b else nan, b.explicit_rhs if b else nan,
        r.sharpness_ratio, r.interp_gap, r.status,
    )
    return [_fmt(v) for v in values]


def to_csv(rows: Sequence[DeviationReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(report_row(r))
    return buf.getvalue()


def to_json(rows: Sequence[DeviationReport], config: Optional[ExperimentConfig] = None) -> str:
    doc: Dict[str, Any] = {"rows": [r.as_dict() for r in rows]}
    if config is not None:
        doc["config"] = config.to_dict()
    return json.dumps(doc, indent=2, allow_nan=True)


def write_report(rows: Sequence[DeviationReport], fmt: str, out=None, config: Optional[ExperimentConfig] = None) -> str:
    if fmt == "csv":
        text = to_csv(rows)
    elif fmt == "json":
        text = to_json(rows, config)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if out is not None:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    return text
