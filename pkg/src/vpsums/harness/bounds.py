"""Right-hand sides of the deviation bounds, split into leading term and remainder.

Theorems are labelled by what they bound:

* ``T1``: ||f - V_{n,p} f||_C through E_m(f^psi_beta) in L_s, 1 <= s < inf;
* ``T2``: the same in L_inf, with the second harmonic split off;
* ``T3``/``T4``: the interpolation analogs of T1/T2 (need p >= 2).

Throughout m = n - p + 1. ``explicit_rhs`` uses Hoelder's inequality with
every constant written out, so it is a rigorous inequality and not only an
asymptotic statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ..psi_calculus import PsiBetaWeight, tau_sum
from ..trig_core import NormIndex, cos_norm

THEOREMS = ("T1", "T2", "T3", "T4")


@dataclass(frozen=True)
class BoundBreakdown:
    """Leading term, remainder and explicit right-hand side of one bound.

    ``remainder_alt`` carries the other remainder form for the L_inf bounds:
    the split form for T4 and the plain tau-sum from m+1 for T2.
    """

    theorem: str
    leading: float
    remainder: float
    explicit_rhs: float
    E_value: float
    remainder_alt: Optional[float] = None

    def __post_init__(self):
        if self.leading < 0.0 or self.remainder < 0.0:
            raise ValueError("leading term and remainder must be non-negative")


def explicit_constant(idx: NormIndex) -> float:
    """2^{1/s'} / pi^{1/s}, the factor in front of the tau-sum in the explicit bound."""
    if idx.is_inf:
        return 2.0
    s = idx.value
    inv_sc = 0.0 if s == 1.0 else 1.0 - 1.0 / s
    return 2.0**inv_sc / math.pi ** (1.0 / s)


def split_remainder(w: PsiBetaWeight, n: int, p: int) -> float:
    """(1/p) [psi(m+1)^2/psi(m) + p * sum_{k >= m+2} tau(k) psi(k)]."""
    m = n - p + 1
    if m + 1 > w.K_max:
        raise ValueError(f"need m + 1 <= K_max, got m={m}, K_max={w.K_max}")
    psi_m, psi_m1 = w.psi_at(m), w.psi_at(m + 1)
    return (psi_m1 * psi_m1 / psi_m + p * tau_sum(w, n, p, 3)[0]) / p


def bound_rhs(theorem: str, w: PsiBetaWeight, n: int, p: int, idx: NormIndex, E: float) -> BoundBreakdown:
    """Evaluate one bound for the deviation of a function with E_m(f^psi_beta) = E."""
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem {theorem!r}; expected one of {THEOREMS}")
    if not 1 <= p <= n:
        raise ValueError(f"parameter range: need 1 <= p <= n, got n={n}, p={p}")
    if E < 0.0:
        raise ValueError("E must be non-negative")
    m = n - p + 1
    if m > w.K_max:
        raise ValueError(f"m = n-p+1 = {m} exceeds K_max = {w.K_max}")
    if theorem in ("T3", "T4") and p < 2:
        raise ValueError(f"parameter range: {theorem} needs 2 <= p <= n, got p={p}")
    sup_metric = theorem in ("T2", "T4")
    if sup_metric and not idx.is_inf:
        raise ValueError(f"{theorem} is stated for s = inf, got s={idx}")
    if not sup_metric and idx.is_inf:
        raise ValueError(f"{theorem} needs finite s; use T2/T4 for s = inf")

    psi_m = w.psi_at(m)
    tail2 = tau_sum(w, n, p, 2)[0]
    leading = cos_norm(idx.conj) * psi_m / (math.pi * p)
    explicit = (leading + explicit_constant(idx) * tail2) * E
    if theorem == "T2":
        return BoundBreakdown(theorem, leading, split_remainder(w, n, p), explicit, E, remainder_alt=tail2)
    if theorem == "T4":
        return BoundBreakdown(theorem, leading, tail2, explicit, E, remainder_alt=split_remainder(w, n, p))
    return BoundBreakdown(theorem, leading, tail2, explicit, E)
