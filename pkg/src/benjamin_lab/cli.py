"""Command-line entry point: ``benjamin-lab SUBCOMMAND --config FILE [--out DIR] [--seed N]``.

Each run writes report.json, report.txt and the experiment's CSV, checkpoint or
JSON-lines files into the output directory. The exit status is 0 exactly when
every pass/fail clause in the report passes, 1 when some clause fails and 2 on
configuration or input errors.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import experiments as ex
from .bounds import BoundsConfig
from .config import SCHEMAS, ConfigError, initial_params, load_config, parse_config, section
from .report import report_text, write_report
from .solver import BoundaryError, InstabilityError
from .spectral import Grid1D

__all__ = ["main", "run_cli", "build_parser", "run_experiment"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="benjamin-lab", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=sorted(SCHEMAS))
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    parser.add_argument("--seed", type=int, help="random seed (overrides seed)")
    parser.add_argument("--quiet", action="store_true", help="do not print the text report")
    return parser


def _inputs(cfg: dict, subcommand: str) -> dict:
    echo = {k: v for k, v in cfg.items() if k != "output.dir"}
    echo["subcommand"] = subcommand
    return echo


def _window(cfg: dict):
    x1, x2 = cfg["tstar.window_x1"], cfg["tstar.window_x2"]
    if (x1 is None) != (x2 is None):
        raise ConfigError("tstar.window_x1 and tstar.window_x2 must be given together")
    return None if x1 is None else (x1, x2)


def run_experiment(subcommand: str, cfg: dict, out_dir: str) -> ex.ExperimentReport:
    inputs = _inputs(cfg, subcommand)
    if subcommand == "bounds":
        bcfg = BoundsConfig(n=cfg["bounds.n"], length=cfg["bounds.length"],
                            x_samples=cfg["bounds.x_samples"], df_n=cfg["bounds.df_n"])
        frozen = cfg["bounds.frozen"]
        frozen = None if frozen == "none" else ex.load_frozen_bounds(None if frozen == "packaged" else frozen)
        return ex.run_bounds(inputs, bcfg, refine=cfg["bounds.refine"], frozen=frozen,
                             stein=cfg["bounds.stein"], out_dir=out_dir)
    if subcommand == "symbolic-verify":
        return ex.run_symbolic_verify(inputs, cfg["symbolic.transcriptions"], cfg["symbolic.allowlist"],
                                      out_dir=out_dir)

    grid = Grid1D(cfg["grid.n"], cfg["grid.length"])
    phi = ex.make_datum(cfg["initial.kind"], grid, initial_params(cfg))
    solver_cfg = section(cfg, "solver")
    if subcommand == "solve":
        return ex.run_solve(grid, phi, solver_cfg, inputs, cfg["check.linear_exactness"],
                            cfg["check.convergence"], out_dir=out_dir)
    if subcommand == "conservation":
        return ex.run_conservation(grid, phi, solver_cfg, inputs,
                                   first_moment_law=cfg["conservation.first_moment_law"], out_dir=out_dir)
    if subcommand == "tstar":
        return ex.run_tstar(grid, phi, solver_cfg, inputs, snapshots=cfg["tstar.snapshots"],
                            window=_window(cfg), side=cfg["tstar.side"],
                            oracle_points=cfg["tstar.oracle_points"], nonlinear=cfg["tstar.nonlinear"],
                            nonlinear_dt=cfg["tstar.nonlinear_dt"], out_dir=out_dir)
    if subcommand == "pair":
        return ex.run_pair(grid, phi, solver_cfg, inputs, matched=cfg["pair.matched"], seed=cfg["seed"],
                           norm_gap=cfg["pair.norm_gap"], truncation_N=cfg["pair.truncation_N"],
                           frozen_ratio=cfg["pair.frozen_ratio"], out_dir=out_dir)
    if subcommand == "uniqueness-cert":
        return ex.run_uniqueness_cert(grid, phi, solver_cfg, inputs,
                                      interval=(cfg["cert.interval_a"], cfg["cert.interval_b"]),
                                      bump_center=cfg["cert.bump_center"], bump_width=cfg["cert.bump_width"],
                                      bump_amplitude=cfg["cert.bump_amplitude"], out_dir=out_dir)
    raise ConfigError(f"unknown subcommand {subcommand!r}")


def run_cli(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg = load_config(args.config, args.subcommand)
        else:
            cfg = parse_config("", args.subcommand, "<defaults>")
        if args.seed is not None:
            cfg["seed"] = args.seed
        out_dir = args.out if args.out is not None else cfg["output.dir"]
        os.makedirs(out_dir, exist_ok=True)
        report = run_experiment(args.subcommand, cfg, out_dir)
    except (ConfigError, ValueError, OSError, BoundaryError, InstabilityError) as exc:
        print(f"benjamin-lab: error: {exc}", file=sys.stderr)
        return 2
    write_report(report, out_dir)
    if not args.quiet:
        sys.stdout.write(report_text(report))
    return 0 if report.passed else 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
