"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import contextlib
import dataclasses
import logging
import os
import sys

import numpy as np
import scipy.linalg

from . import fwm, runs
from .config import ConfigError, RunConfig, parse_config
from .projector import project

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a configuration key (repeatable)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--grid-points", type=int)
    p.add_argument("--half-width", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cascade-ent",
        description="Spectral entanglement of cascaded atomic-ensemble multiphoton sources.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate one amplitude")
    _common(p)
    p.add_argument("detunings", nargs="+", type=float, help="detunings in route photon order")

    p = sub.add_parser("project", help="export a projected 2D grid as CSV")
    _common(p)

    p = sub.add_parser("schmidt", help="Schmidt decomposition report (JSON)")
    _common(p)
    p.add_argument("--grid-out", help="also write the final 2D grid as CSV")

    p = sub.add_parser("sweep", help="entropy over a parameter sweep (CSV)")
    _common(p)

    p = sub.add_parser("volume", help="export a normalized 3D |f| volume (CSV)")
    _common(p)

    p = sub.add_parser("convergence", help="entropy vs grid points and window (CSV)")
    _common(p)

    p = sub.add_parser("fwm", help="solve the phase-matching emission angles")
    p.add_argument("theta_a", type=float, help="degrees")
    p.add_argument("theta_b", type=float, help="degrees")
    p.add_argument("ratio", type=float, help="lambda_b / lambda_a")
    return parser


def load_config(args) -> RunConfig:
    text = ""
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    overrides = list(args.set)
    if args.grid_points is not None:
        overrides.append(f"grid.n_points={args.grid_points}")
    if args.half_width is not None:
        overrides.append(f"grid.half_width={args.half_width}")
    if args.tol is not None:
        overrides.append(f"tol={args.tol}")
    if args.workers is not None:
        overrides.append(f"workers={args.workers}")
    return parse_config(text, overrides)


@contextlib.contextmanager
def _output(path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh
    else:
        yield sys.stdout


def fwm_command(theta_a_deg: float, theta_b_deg: float, ratio: float) -> str:
    try:
        geom = fwm.FwmGeometry.from_degrees(theta_a_deg, theta_b_deg, ratio)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    ti, ts = fwm.solve_angles(geom)
    r1, r2 = fwm.residual(geom, ti, ts)
    return (
        f"theta_i={np.degrees(ti):.1f} theta_s={np.degrees(ts):.1f}\n"
        f"theta_i_deg={runs.fmt(np.degrees(ti))} theta_s_deg={runs.fmt(np.degrees(ts))} "
        f"residual_1={r1:.3e} residual_2={r2:.3e}\n"
    )


def _dispatch(args) -> None:
    if args.command == "fwm":
        sys.stdout.write(fwm_command(args.theta_a, args.theta_b, args.ratio))
        return
    config = load_config(args)
    if args.command == "eval":
        value = runs.evaluate(config, args.detunings)
        with _output(args.out) as fh:
            fh.write(f"re={runs.fmt(value.real)} im={runs.fmt(value.imag)} abs={runs.fmt(abs(value))}\n")
    elif args.command == "project":
        runs._check_fixed(config, 2)
        grid = project(config.route, config.params, config.fixed_map, config.grid)
        with _output(args.out or config.out_grid) as fh:
            runs.write_grid_csv(grid, fh)
    elif args.command == "schmidt":
        if args.grid_out:
            config = dataclasses.replace(config, out_grid=args.grid_out)
        report = runs.run_schmidt(config)
        with _output(args.out or config.out_report) as fh:
            fh.write(runs.dump_report(report))
    elif args.command == "sweep":
        table = runs.run_sweep(config)
        with _output(args.out) as fh:
            fh.write(table)
    elif args.command == "volume":
        with _output(args.out or config.out_volume) as fh:
            runs.export_grid_3d(config, fh)
    elif args.command == "convergence":
        with _output(args.out) as fh:
            fh.write(runs.grid_dependence(config))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _dispatch(args)
    except BrokenPipeError:
        # downstream reader closed early (e.g. `| head`); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, fwm.SolverError, scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
