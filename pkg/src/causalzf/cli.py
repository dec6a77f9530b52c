"""Command-line front end.

    causalzf gamma   --input CH.json [--output REC.json] [--abs-tol T] [--n-max N]
    causalzf hinf    --input CH.json [--output REC.json] [--grid G]
    causalzf precode --input CH.json --output PRE.json [--gamma G | --margin F] [--nodes SPEC]
    causalzf verify  --input CH.json --precoder PRE.json [--output REP.json]
    causalzf report  --input CH.json [--precoder PRE.json] [--output REP.json] [--seed S]

Every flag can also be set through an environment variable named
``CAUSALZF_<FLAG>`` (dashes become underscores); command-line flags win.

Exit codes: 0 ok, 2 section budget exhausted (gamma is a lower bound),
3 optimal norm infinite, 4 kernel not positive (gamma too small),
5 residual or norm check failed, 6 other construction failure,
64 unreadable input, 65 incompatible dimensions.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

from . import formats
from .colligation import NodeSpec, Tolerances, precode
from .errors import (
    CausalZFError,
    DimensionMismatchError,
    MalformedInputError,
    NotPositiveKernelError,
)
from .gammaopt import (
    boundary_sigma_extremes,
    delta_c_grid,
    estimate_gamma_opt,
    estimate_hinf_norm,
)
from .verify import VerificationGrid, brute_force_rho, verify_precoder

EXIT_OK = 0
EXIT_BUDGET = 2
EXIT_INFINITE = 3
EXIT_NOT_PSD = 4
EXIT_VERIFY = 5
EXIT_CONSTRUCTION = 6
EXIT_PARSE = 64
EXIT_DIMENSION = 65

ENV_PREFIX = "CAUSALZF_"
DICHOTOMY_TOL = 1e-3


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    input: str | None
    output: str | None
    precoder: str | None
    abs_tol: float
    n_max: int
    zero_threshold: float
    grid: int
    gamma: float | None
    margin: float
    nodes: NodeSpec
    tols: Tolerances
    seed: int
    trials: int

    def __post_init__(self):
        for name in ("abs_tol", "zero_threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.gamma is None and not self.margin > 1.0:
            raise ValueError("--margin must exceed 1 when gamma is derived automatically")
        if self.n_max < 1:
            raise ValueError("--n-max must be at least 1")
        if self.grid < 64:
            raise ValueError("--grid must be at least 64")


def _env(flag):
    return os.environ.get(ENV_PREFIX + flag.upper().replace("-", "_"))


def _add(parser, flag, **kw):
    env = _env(flag)
    if env is not None:
        kw["default"] = env
    parser.add_argument("--" + flag, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalzf",
        description="Optimal-norm causal zero-forcing precoders for FIR MIMO channels.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, help_ in [("gamma", "estimate the optimal precoder norm"),
                        ("hinf", "estimate the channel peak norm"),
                        ("precode", "construct a causal precoder"),
                        ("verify", "check a stored precoder against a channel"),
                        ("report", "summary of all channel figures")]:
        p = sub.add_parser(name, help=help_)
        _add(p, "input", help="channel JSON file")
        _add(p, "output", help="output file (default: stdout)")
        _add(p, "precoder", help="precoder JSON file (verify, report)")
        _add(p, "abs-tol", type=float, default=1e-6, help="stagnation tolerance on rho_N")
        _add(p, "n-max", type=int, default=512, help="largest section degree")
        _add(p, "zero-threshold", type=float, default=1e-8)
        _add(p, "grid", type=int, default=4096, help="unit-circle grid size for peak norms")
        _add(p, "gamma", type=float, default=None, help="precoder norm bound")
        _add(p, "margin", type=float, default=1.05,
             help="gamma = margin * estimated optimal norm when --gamma is absent")
        _add(p, "nodes", default="taylor:32:512",
             help="generator spec: taylor:P[:Pmax] or rings:r1,r2xJ")
        _add(p, "psd-tol", type=float, default=1e-8)
        _add(p, "fit-tol", type=float, default=1e-7)
        _add(p, "op-tol", type=float, default=1e-8)
        _add(p, "residual-tol", type=float, default=1e-6)
        _add(p, "seed", type=int, default=0, help="seed for the random oracle in report")
        _add(p, "trials", type=int, default=1000, help="oracle trials in report")
    return parser


def config_from_args(args) -> RunConfig:
    tols = Tolerances(psd_tol=args.psd_tol, fit_tol=args.fit_tol, op_tol=args.op_tol,
                      residual_tol=args.residual_tol)
    return RunConfig(subcommand=args.subcommand, input=args.input, output=args.output,
                     precoder=args.precoder, abs_tol=args.abs_tol, n_max=args.n_max,
                     zero_threshold=args.zero_threshold, grid=args.grid, gamma=args.gamma,
                     margin=args.margin, nodes=NodeSpec.parse(args.nodes), tols=tols,
                     seed=args.seed, trials=args.trials)


def _emit(cfg: RunConfig, doc: dict):
    text = formats.dumps(doc)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _need(path, what):
    if not path:
        raise MalformedInputError(f"--{what} is required", field=what)
    return path


def _load_channel(cfg):
    try:
        return formats.load_channel(_need(cfg.input, "input"))
    except OSError as exc:
        raise MalformedInputError(f"cannot read channel: {exc}", field="input") from exc


def _load_precoder(cfg):
    try:
        return formats.load_precoder(_need(cfg.precoder, "precoder"))
    except OSError as exc:
        raise MalformedInputError(f"cannot read precoder: {exc}", field="precoder") from exc


def _gamma_exit(rec) -> int:
    if math.isinf(rec.gamma_estimate):
        return EXIT_INFINITE
    return EXIT_OK if rec.converged else EXIT_BUDGET


def cmd_gamma(cfg: RunConfig) -> int:
    H = _load_channel(cfg)
    rec = estimate_gamma_opt(H, cfg.abs_tol, cfg.n_max, cfg.zero_threshold)
    _emit(cfg, formats.record_to_dict(rec))
    return _gamma_exit(rec)


def cmd_hinf(cfg: RunConfig) -> int:
    H = _load_channel(cfg)
    rec = estimate_hinf_norm(H, cfg.abs_tol, cfg.n_max, cfg.grid)
    _emit(cfg, formats.record_to_dict(rec))
    return EXIT_OK if rec.converged else EXIT_BUDGET


def cmd_precode(cfg: RunConfig) -> int:
    H = _load_channel(cfg)
    gamma, rec = cfg.gamma, None
    if gamma is None:
        rec = estimate_gamma_opt(H, cfg.abs_tol, cfg.n_max, cfg.zero_threshold)
        if math.isinf(rec.gamma_estimate):
            print("optimal norm is infinite; no causal precoder exists", file=sys.stderr)
            return EXIT_INFINITE
        if not rec.converged:
            print("warning: section budget exhausted, gamma estimate is a lower bound",
                  file=sys.stderr)
        gamma = cfg.margin * rec.gamma_estimate
    try:
        G = precode(H, gamma, cfg.nodes, cfg.tols)
    except NotPositiveKernelError as exc:
        print(f"kernel not positive: {exc}", file=sys.stderr)
        return EXIT_NOT_PSD
    G = replace_report_norm(G, cfg)
    doc = formats.precoder_to_dict(G)
    if rec is not None:
        doc["gamma_record"] = formats.record_to_dict(rec)
    _emit(cfg, formats._plain(doc))
    return EXIT_OK if G.verification.passed else EXIT_VERIFY


def replace_report_norm(G, cfg):
    """Recompute the peak-norm figure at the configured grid size."""
    from dataclasses import replace

    if G.verification is not None and G.verification.peak_grid_size == cfg.grid:
        return G
    report = verify_precoder_for(G, cfg)
    return replace(G, verification=report)


def verify_precoder_for(G, cfg, H=None):
    H = H if H is not None else _load_channel(cfg)
    return verify_precoder(H, G, VerificationGrid(), residual_tol=cfg.tols.residual_tol,
                           peak_grid_size=cfg.grid)


def cmd_verify(cfg: RunConfig) -> int:
    H = _load_channel(cfg)
    G = _load_precoder(cfg)
    if G.shape != (H.n, H.m):
        print(f"dimension mismatch: channel {H.m}x{H.n}, precoder {G.n}x{G.m}", file=sys.stderr)
        return EXIT_DIMENSION
    report = verify_precoder_for(G, cfg, H)
    _emit(cfg, formats._plain({"format": "causalzf-verification", **report.to_dict()}))
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_report(cfg: RunConfig) -> int:
    H = _load_channel(cfg)
    rec = estimate_gamma_opt(H, cfg.abs_tol, cfg.n_max, cfg.zero_threshold)
    hrec = estimate_hinf_norm(H, cfg.abs_tol, cfg.n_max, cfg.grid)
    ess_inf, ess_sup = boundary_sigma_extremes(H, cfg.grid)
    rho_limit = rec.rho_seq[-1][1] if rec.rho_seq else 0.0
    doc = {
        "format": "causalzf-report",
        "channel": {"m": H.m, "n": H.n, "degree": H.degree},
        "gamma": formats.record_to_dict(rec),
        "hinf": formats.record_to_dict(hrec),
        "rho_limit_estimate": rho_limit,
        "boundary_sigma_min": ess_inf,
        "boundary_sigma_max": ess_sup,
        "delta_c_grid": delta_c_grid(H),
        "dichotomy": {
            "rho_limit": rho_limit,
            "boundary_sigma_min": ess_inf,
            "differ": abs(rho_limit - ess_inf) > DICHOTOMY_TOL,
            "note": "1/gamma_opt is the limit of sigma_min over sections, "
                    "not the boundary infimum of sigma_min(H)",
        },
    }
    if rec.rho_seq:
        N = rec.rho_seq[-1][0]
        doc["oracle"] = {"N": N, "trials": cfg.trials, "seed": cfg.seed,
                         "brute_force_rho": brute_force_rho(H, N, cfg.trials, cfg.seed)}
    if cfg.precoder:
        G = _load_precoder(cfg)
        if G.shape != (H.n, H.m):
            print("dimension mismatch between channel and precoder", file=sys.stderr)
            return EXIT_DIMENSION
        doc["verification"] = verify_precoder_for(G, cfg, H).to_dict()
    _emit(cfg, formats._plain(doc))
    return EXIT_OK


COMMANDS = {
    "gamma": cmd_gamma,
    "hinf": cmd_hinf,
    "precode": cmd_precode,
    "verify": cmd_verify,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except MalformedInputError as exc:
        where = f" (field: {exc.field})" if exc.field else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return EXIT_PARSE
    except DimensionMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except CausalZFError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION


if __name__ == "__main__":
    sys.exit(main())
