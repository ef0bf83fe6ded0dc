"""Experiment configuration: dataclasses, defaults and JSON loading."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Tuple

from ..psi_calculus import PsiBetaWeight, make_beta, make_psi
from ..trig_core import NormIndex

PHI_KINDS = ("random", "extremal", "harmonic", "low_order")
BETA_MODES = ("zero", "one", "alternating", "constant", "cycle")
CYCLED_BETA = ("zero", "one", "alternating")

FAMILY_ALIASES = {
    "2^-k^2": ("q_pow_k_squared", 0.5),
    "1/k!": ("inverse_factorial", None),
}
DEFAULT_KMAX = {"q_pow_k_squared": 24, "inverse_factorial": 30}


class ConfigError(ValueError):
    """The configuration document is malformed or inconsistent."""


@dataclass(frozen=True)
class PsiConfig:
    family: str
    q: Optional[float] = None
    kmax: Optional[int] = None

    def build(self, beta_mode: str = "zero", beta_value: Optional[float] = None) -> PsiBetaWeight:
        K = self.kmax or DEFAULT_KMAX.get(self.family)
        w = make_psi(self.family, K, q=self.q)
        return w.with_beta(make_beta(beta_mode, w.K_max, value=beta_value))

    @property
    def label(self) -> str:
        if self.family == "q_pow_k_squared":
            return f"q_pow_k_squared({self.q:g})"
        return self.family


@dataclass(frozen=True)
class PhiConfig:
    """Which derivative phi = f^psi_beta each cell uses.

    ``random``: normal coefficients of order n + extra_order, zero mean,
    scaled to unit L_s norm (``reps`` draws per cell). ``extremal``: the
    construction that attains the leading term. ``harmonic``: cos(m x).
    ``low_order``: random of order n - p, the degenerate case.
    """

    kind: str = "random"
    reps: int = 5
    extra_order: int = 4
    E: float = 1.0
    seed: Optional[int] = None


@dataclass(frozen=True)
class Tolerances:
    explicit_slack: float = 1e-8
    constant_ceiling: float = 10.0
    gap_ceiling: float = 10.0


@dataclass(frozen=True)
class ExperimentConfig:
    psi: Tuple[PsiConfig, ...] = (PsiConfig("q_pow_k_squared", 0.5, 24), PsiConfig("inverse_factorial", None, 30))
    beta_mode: str = "cycle"
    beta_value: Optional[float] = None
    s: Tuple[NormIndex, ...] = (NormIndex(1.5), NormIndex(2.0), NormIndex(4.0))
    n_values: Tuple[int, ...] = tuple(range(4, 13))
    p_values: Tuple[int, ...] = (1, 2, 3)
    phi: PhiConfig = field(default_factory=PhiConfig)
    tolerances: Tolerances = field(default_factory=Tolerances)
    grid_size: int = 4096
    seed: int = 0

    def __post_init__(self):
        if self.beta_mode not in BETA_MODES:
            raise ConfigError(f"unknown beta mode {self.beta_mode!r}; expected one of {BETA_MODES}")
        if self.beta_mode == "constant" and self.beta_value is None:
            raise ConfigError("beta mode 'constant' needs a value")
        if self.phi.kind not in PHI_KINDS:
            raise ConfigError(f"unknown phi kind {self.phi.kind!r}; expected one of {PHI_KINDS}")
        if self.phi.reps < 1 or self.phi.extra_order < 0 or not self.phi.E > 0.0:
            raise ConfigError("phi needs reps >= 1, extra_order >= 0 and E > 0")
        if self.grid_size < 64:
            raise ConfigError("grid_size must be at least 64")

    @property
    def reps(self) -> int:
        return self.phi.reps if self.phi.kind in ("random", "low_order") else 1

    @property
    def phi_seed(self) -> int:
        return self.seed if self.phi.seed is None else self.phi.seed

    def beta_for(self, n: int, p: int, rep: int) -> str:
        if self.beta_mode == "cycle":
            return CYCLED_BETA[(n + p + rep) % len(CYCLED_BETA)]
        return self.beta_mode

    def cells(self) -> Iterator[Tuple[PsiConfig, NormIndex, int, int, int]]:
        for fam in self.psi:
            for s in self.s:
                for n in self.n_values:
                    for p in self.p_values:
                        for rep in range(self.reps):
                            yield fam, s, n, p, rep

    def replace(self, **changes) -> "ExperimentConfig":
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(changes)
        return ExperimentConfig(**data)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "psi": [{k: v for k, v in asdict(p).items() if v is not None} for p in self.psi],
            "beta": {"mode": self.beta_mode, **({"value": self.beta_value} if self.beta_value is not None else {})},
            "s": [s.label for s in self.s],
            "n_range": {"values": list(self.n_values)},
            "p_range": {"values": list(self.p_values)},
            "phi": {"kind": self.phi.kind,
                    "params": {"reps": self.phi.reps, "extra_order": self.phi.extra_order, "E": self.phi.E},
                    **({"seed": self.phi.seed} if self.phi.seed is not None else {})},
            "tolerances": asdict(self.tolerances),
            "grid_size": self.grid_size,
            "seed": self.seed,
        }


def default_config() -> ExperimentConfig:
    return ExperimentConfig()


def _as_list(x) -> list:
    return list(x) if isinstance(x, (list, tuple)) else [x]


def parse_psi(entry) -> PsiConfig:
    if isinstance(entry, str):
        entry = {"family": entry}
    if not isinstance(entry, dict) or "family" not in entry:
        raise ConfigError("psi entries need a 'family'")
    _reject_unknown(entry, {"family", "q", "kmax"}, "psi")
    fam = entry["family"]
    q = entry.get("q")
    if fam in FAMILY_ALIASES:
        fam, q_alias = FAMILY_ALIASES[fam]
        q = q if q is not None else q_alias
    if fam not in ("q_pow_k_squared", "inverse_factorial"):
        raise ConfigError(f"unknown psi family {entry['family']!r}")
    if fam == "q_pow_k_squared" and (q is None or not 0.0 < float(q) < 1.0):
        raise ConfigError("q_pow_k_squared needs 0 < q < 1")
    kmax = entry.get("kmax")
    if kmax is not None and (not isinstance(kmax, int) or kmax < 4):
        raise ConfigError("kmax must be an integer >= 4")
    cfg = PsiConfig(fam, None if q is None else float(q), kmax)
    try:
        cfg.build()
    except ValueError as exc:
        raise ConfigError(f"psi {cfg.label}: {exc}") from exc
    return cfg


def _parse_range(spec, name: str) -> Tuple[int, ...]:
    """``[lo, hi]`` is inclusive; ``{"values": [...]}`` lists values; a bare int is one value."""
    if isinstance(spec, int):
        return (spec,)
    if isinstance(spec, dict) and "values" in spec:
        vals = spec["values"]
    elif isinstance(spec, (list, tuple)) and len(spec) == 2:
        lo, hi = spec
        if not (isinstance(lo, int) and isinstance(hi, int)):
            raise ConfigError(f"{name} bounds must be integers")
        vals = list(range(lo, hi + 1))
    else:
        raise ConfigError(f"{name} must be [lo, hi], {{'values': [...]}} or an integer")
    if not all(isinstance(v, int) for v in vals):
        raise ConfigError(f"{name} values must be integers")
    return tuple(vals)


def _parse_s(spec) -> Tuple[NormIndex, ...]:
    out = []
    for v in _as_list(spec):
        try:
            out.append(NormIndex.parse(v))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid s value {v!r}: {exc}") from exc
    return tuple(out)


def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")


def config_from_dict(doc: Dict[str, Any]) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    _reject_unknown(doc, {"psi", "beta", "s", "n_range", "p_range", "phi", "tolerances", "grid_size", "seed"}, "config")
    base = default_config()
    kw: Dict[str, Any] = {}
    if "psi" in doc:
        kw["psi"] = tuple(parse_psi(e) for e in _as_list(doc["psi"]))
    if "beta" in doc:
        beta = doc["beta"] if isinstance(doc["beta"], dict) else {"mode": doc["beta"]}
        _reject_unknown(beta, {"mode", "value"}, "beta")
        kw["beta_mode"] = beta.get("mode", base.beta_mode)
        kw["beta_value"] = beta.get("value")
    if "s" in doc:
        kw["s"] = _parse_s(doc["s"])
    if "n_range" in doc:
        kw["n_values"] = _parse_range(doc["n_range"], "n_range")
    if "p_range" in doc:
        kw["p_values"] = _parse_range(doc["p_range"], "p_range")
    if "phi" in doc:
        phi = doc["phi"] if isinstance(doc["phi"], dict) else {"kind": doc["phi"]}
        _reject_unknown(phi, {"kind", "params", "seed"}, "phi")
        params = phi.get("params", {}) or {}
        _reject_unknown(params, {"reps", "extra_order", "E"}, "phi.params")
        try:
            kw["phi"] = PhiConfig(
                kind=phi.get("kind", "random"),
                reps=int(params.get("reps", 5)),
                extra_order=int(params.get("extra_order", 4)),
                E=float(params.get("E", 1.0)),
                seed=None if phi.get("seed") is None else int(phi["seed"]),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid phi parameters: {exc}") from exc
    if "tolerances" in doc:
        tol = doc["tolerances"]
        if not isinstance(tol, dict):
            raise ConfigError("tolerances must be an object")
        _reject_unknown(tol, {"explicit_slack", "constant_ceiling", "gap_ceiling"}, "tolerances")
        kw["tolerances"] = Tolerances(**{k: float(v) for k, v in tol.items()})
    for key in ("grid_size", "seed"):
        if key in doc:
            if not isinstance(doc[key], int):
                raise ConfigError(f"{key} must be an integer")
            kw[key] = doc[key]
    try:
        return base.replace(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(doc)

