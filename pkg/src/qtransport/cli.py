"""Command-line front end.

Subcommands::

    qtransport simulate --config c.json [--t-end 50] [--coherences]
    qtransport sweep    --config c.json --axis omega --from 0.5 --to 10 --points 100 [--log]
    qtransport figure   fig3_frequency [--method both]
    qtransport validate

Outputs go to ``--out`` (default ``$QTRANSPORT_OUT`` or the working
directory).  Exit codes: 1 config error, 2 non-convergence, 3 validation
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from .dynamics import IntegrationError, propagate_exact
from .efficiency import NonConvergedError, NoSteadyFluxError, parameter_sweep
from .liouvillian import assemble
from .model import InvalidConfigError, load_config, localized_state
from .plotting import EmptyDataError, emit_plot
from .presets import PRESETS, build_figure, get_preset

__all__ = ["main", "run", "build_parser"]

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_VALIDATION = 0, 1, 2, 3


class _Failure(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind = code, kind


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="output directory (default $QTRANSPORT_OUT or .)")
    common.add_argument("--workers", type=int, default=1, help="parallel worker processes for sweeps")
    common.add_argument("--method", choices=("exact", "fmm", "both"), default=None)
    common.add_argument("--error-json", action="store_true", help="print errors as a JSON object on stderr")

    parser = argparse.ArgumentParser(prog="qtransport", description="Driven dissipative transport simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="exact trajectory to CSV")
    sim.add_argument("--config", type=Path, required=True)
    sim.add_argument("--t-end", type=float, default=50.0)
    sim.add_argument("--samples", type=int, default=501)
    sim.add_argument("--coherences", action="store_true", help="add site coherence columns")

    sw = sub.add_parser("sweep", parents=[common], help="efficiency along one parameter axis")
    sw.add_argument("--config", type=Path, required=True)
    sw.add_argument("--axis", choices=("omega", "delta", "gamma", "mu", "kappa"), default="omega")
    sw.add_argument("--from", dest="start", type=float, required=True)
    sw.add_argument("--to", dest="stop", type=float, required=True)
    sw.add_argument("--points", type=int, default=100)
    sw.add_argument("--log", action="store_true", help="log-spaced grid")
    sw.add_argument("--no-refine", action="store_true", help="skip golden-section refinement of the extrema")

    fig = sub.add_parser("figure", parents=[common], help="reproduce a named figure (CSV + SVG)")
    fig.add_argument("preset", choices=sorted(PRESETS))
    fig.add_argument("--config", type=Path, default=None, help="config for the custom preset")

    val = sub.add_parser("validate", parents=[common], help="run the cross-implementation checks")
    val.add_argument("--seed", type=int, default=7, help="seed for the random configurations")
    return parser


def _out_dir(args) -> Path:
    out = args.out or Path(os.environ.get("QTRANSPORT_OUT", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(path):
    try:
        return load_config(path)
    except InvalidConfigError as exc:
        raise _Failure(EXIT_CONFIG, "config", str(exc)) from exc


def _cmd_simulate(args) -> int:
    cfg = _config(args.config)
    out = _out_dir(args)
    if args.t_end <= 0 or args.samples < 2:
        raise _Failure(EXIT_CONFIG, "config", "--t-end must be positive and --samples at least 2")
    try:
        traj = propagate_exact(assemble(cfg), localized_state(cfg, cfg.initial_site), args.t_end, samples=args.samples,
                               rtol=cfg.tolerances.rtol, atol=cfg.tolerances.atol)
    except IntegrationError as exc:
        raise _Failure(EXIT_NONCONVERGED, "integration", str(exc)) from exc
    target = out / f"{args.config.stem}_trajectory.csv"
    traj.to_csv(target, coherences=args.coherences)
    print(target)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _config(args.config)
    out = _out_dir(args)
    if args.points < 2 or not args.stop > args.start:
        raise _Failure(EXIT_CONFIG, "config", "need --points >= 2 and --to > --from")
    if args.log and args.start <= 0:
        raise _Failure(EXIT_CONFIG, "config", "--log needs a positive --from")
    grid = np.geomspace(args.start, args.stop, args.points) if args.log else np.linspace(args.start, args.stop, args.points)
    methods = ("exact", "fmm") if args.method == "both" else (args.method or "exact",)
    failed = 0
    for method in methods:
        try:
            res = parameter_sweep(cfg, args.axis, grid, method=method, workers=args.workers, refine=not args.no_refine)
        except (ValueError, InvalidConfigError) as exc:
            raise _Failure(EXIT_CONFIG, "config", str(exc)) from exc
        stem = f"{args.config.stem}_{args.axis}_{method}"
        res.to_csv(out / f"{stem}.csv")
        (out / f"{stem}_summary.json").write_text(json.dumps(res.summary(), indent=2, allow_nan=True) + "\n")
        try:
            emit_plot(res, "line", out / f"{stem}.svg", log_x=args.log)
        except EmptyDataError:
            pass  # every point failed; the exit code reports it
        failed += res.summary()["n_failed"]
        print(out / f"{stem}.csv")
    if failed:
        raise _Failure(EXIT_NONCONVERGED, "nonconvergence", f"{failed} grid point(s) did not converge")
    return EXIT_OK


def _cmd_figure(args) -> int:
    preset = get_preset(args.preset)
    if args.config is not None:
        preset = preset.with_config(_config(args.config))
    elif preset.config is None:
        raise _Failure(EXIT_CONFIG, "config", f"preset {preset.name} needs --config")
    out = _out_dir(args)
    methods = None
    if args.method:
        methods = ("exact", "fmm") if args.method == "both" else (args.method,)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fig = build_figure(preset, methods=methods, workers=args.workers)
    (out / f"{preset.name}.csv").write_text(fig.csv)
    (out / f"{preset.name}.svg").write_text(fig.svg)
    (out / f"{preset.name}_summary.json").write_text(json.dumps(fig.summary, indent=2) + "\n")
    for name, text in fig.extra_files.items():
        (out / f"{preset.name}_{name}").write_text(text)
    print(out / f"{preset.name}.csv")
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .validation import run_checks

    rows = run_checks(seed=args.seed)
    width = max(len(r.name) for r in rows)
    for r in rows:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}")
    if args.out is not None or "QTRANSPORT_OUT" in os.environ:
        out = _out_dir(args)
        (out / "validation.json").write_text(json.dumps([r._asdict() for r in rows], indent=2) + "\n")
    return EXIT_OK if all(r.passed for r in rows) else EXIT_VALIDATION


_COMMANDS = {"simulate": _cmd_simulate, "sweep": _cmd_sweep, "figure": _cmd_figure, "validate": _cmd_validate}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _Failure as exc:
        code, kind, message = exc.code, exc.kind, str(exc)
    except NonConvergedError as exc:
        code, kind, message = EXIT_NONCONVERGED, "nonconvergence", str(exc)
    except (NoSteadyFluxError, InvalidConfigError) as exc:
        code, kind, message = EXIT_CONFIG, "config", str(exc)
    if args.error_json:
        print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    else:
        print(f"qtransport: {kind} error: {message}", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())
