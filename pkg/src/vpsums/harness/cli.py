"""Command-line entry point: ``vpsums {kernel,approximate,sweep,verify}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from ..psi_calculus import kernel_polynomial, truncated_kernel_polynomial
from ..trig_core import NormIndex, UniformGrid
from .config import (
    BETA_MODES,
    PHI_KINDS,
    ConfigError,
    ExperimentConfig,
    PhiConfig,
    default_config,
    load_config,
    parse_psi,
)
from .experiment import run_cell, sweep, write_report
from .verification import verify_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--grid-size", type=int, help="number of uniform grid points M")
    p.add_argument("--seed", type=int, help="base seed for random derivatives")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vpsums", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="emit samples of the (psi, beta) kernel")
    _common(k)
    k.add_argument("--family", default="2^-k^2", help="psi family: 2^-k^2, 1/k!, q_pow_k_squared, inverse_factorial")
    k.add_argument("--q", type=float, help="q for q_pow_k_squared")
    k.add_argument("--kmax", type=int)
    k.add_argument("--beta", default="zero", choices=[b for b in BETA_MODES if b != "cycle"])
    k.add_argument("--beta-value", type=float)
    k.add_argument("--n", type=int, help="with --p: emit the truncated kernel Psi_{j,n,p}")
    k.add_argument("--p", type=int)
    k.add_argument("--j", type=int, default=2)

    a = sub.add_parser("approximate", help="run a single experiment cell")
    _common(a)
    a.add_argument("--family", help="psi family (overrides the config)")
    a.add_argument("--q", type=float)
    a.add_argument("--s", help="norm exponent, e.g. 2 or inf")
    a.add_argument("--n", type=int)
    a.add_argument("--p", type=int)
    a.add_argument("--phi", choices=PHI_KINDS, help="derivative kind")
    a.add_argument("--beta", choices=BETA_MODES)

    s = sub.add_parser("sweep", help="run every cell of a configuration")
    _common(s)

    v = sub.add_parser("verify", help="run the built-in verification suite")
    _common(v)
    v.add_argument("--quick", action="store_true", help="smaller sizes for a fast smoke run")
    v.add_argument("--perturb-multipliers", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else default_config()
    changes = {}
    if args.grid_size is not None:
        changes["grid_size"] = args.grid_size
    if args.seed is not None:
        changes["seed"] = args.seed
    return cfg.replace(**changes) if changes else cfg


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)


def cmd_kernel(args) -> int:
    fam = parse_psi({"family": args.family, **({"q": args.q} if args.q is not None else {}),
                      **({"kmax": args.kmax} if args.kmax is not None else {})})
    try:
        w = fam.build(args.beta, args.beta_value)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if (args.n is None) != (args.p is None):
        raise ConfigError("--n and --p go together")
    try:
        poly = kernel_polynomial(w) if args.n is None else truncated_kernel_polynomial(w, args.n, args.p, args.j)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    g = UniformGrid(args.grid_size or 1024)
    x = g.points
    y = poly(x)
    if args.format == "json":
        text = json.dumps({"family": fam.label, "t": x.tolist(), "value": y.tolist()})
    else:
        text = "t,value\n" + "".join("%.17g,%.17g\n" % (t, v) for t, v in zip(x, y))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    _emit(text, args.out)
    return EXIT_OK


def cmd_approximate(args) -> int:
    cfg = _load(args)
    if args.family is not None:
        entry = {"family": args.family, **({"q": args.q} if args.q is not None else {})}
        cfg = cfg.replace(psi=(parse_psi(entry),))
    if args.s is not None:
        try:
            cfg = cfg.replace(s=(NormIndex.parse(args.s),))
        except ValueError as exc:
            raise ConfigError(f"invalid --s: {exc}") from exc
    if args.phi is not None:
        cfg = cfg.replace(phi=PhiConfig(kind=args.phi, reps=1, extra_order=cfg.phi.extra_order, E=cfg.phi.E,
                                        seed=cfg.phi.seed))
    if args.beta is not None:
        cfg = cfg.replace(beta_mode=args.beta)
    n = args.n if args.n is not None else (cfg.n_values[0] if cfg.n_values else None)
    p = args.p if args.p is not None else (cfg.p_values[0] if cfg.p_values else None)
    if n is None or p is None or not cfg.psi or not cfg.s:
        raise ConfigError("approximate needs one psi family, s, n and p")
    row = run_cell(cfg, cfg.psi[0], cfg.s[0], n, p, 0)
    _emit(write_report([row], args.format, args.out, cfg), args.out)
    return EXIT_OK if row.ok else EXIT_FAIL


def cmd_sweep(args) -> int:
    cfg = _load(args)
    rows = sweep(cfg)
    _emit(write_report(rows, args.format, args.out, cfg), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    kw = {"quick": args.quick, "multiplier_perturbation": args.perturb_multipliers}
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.grid_size is not None:
        kw["grid_size"] = args.grid_size
    summary = verify_suite(**kw)
    if args.format == "json":
        text = json.dumps({"passed": summary.passed, "checks": [vars(c) for c in summary.checks]}, indent=2)
    else:
        text = summary.format() + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    _emit(text, args.out)
    return EXIT_OK if summary.passed else EXIT_FAIL


COMMANDS = {"kernel": cmd_kernel, "approximate": cmd_approximate, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
