"""Command-line entry point: ``coupled-cavities {sweep,oracle-compare,bell-max} CONFIG``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import __version__
from .errors import CavityError, ConfigError
from .sweep import (
    ORACLE_COLUMNS,
    QUANTITIES,
    format_csv,
    header_lines,
    load_config,
    oracle_compare,
    replace_seed_cutoff,
    run_sweep,
    summary_lines,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_TOLERANCE = 2
EXIT_INTERNAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coupled-cavities",
        description="Entanglement and Bell-nonlocality sweeps for two coupled, damped cavity modes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "sweep": "evaluate requested quantities on a grid and write CSV",
        "oracle-compare": "compare the Kraus route, closed forms and RK4 integration",
        "bell-max": "maximize the Bell measure on a grid, reporting the optimal settings",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("config", help="flat key = value configuration file")
        p.add_argument("--out", help="CSV output path (default: standard output)")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE", help="override a config key (repeatable)")
        p.add_argument("--seed", type=int, help="optimizer seed (default 1)")
        p.add_argument("--cutoff", type=int, help="per-mode Fock cutoff n_max")
        p.add_argument("--threads", type=int, default=1, help="worker threads for independent grid points")
    return parser


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
        return
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _report(lines: list[str], out_path: str | None) -> None:
    # keep stdout clean for CSV when no --out is given
    stream = sys.stderr if out_path is None else sys.stdout
    for line in lines:
        print(line, file=stream)


def _run(args) -> int:
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    config = replace_seed_cutoff(load_config(args.config, args.overrides), args.seed, args.cutoff)
    if args.command == "oracle-compare":
        try:
            report = oracle_compare(config, threads=args.threads)
        except CavityError as exc:
            # the integrator or Kraus series itself broke down: a numerical failure
            print(f"FAIL: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_TOLERANCE
        header = header_lines(config, report.cutoff, args.command) + [f"# dt={report.dt:.6g}", f"# tolerance={config.tolerance:.3g}"]
        _emit(format_csv(ORACLE_COLUMNS, report.rows, header), args.out)
        lines = [f"scenario {config.scenario}, cutoff {report.cutoff}, worst deviation {report.worst:.3g} (tolerance {config.tolerance:.3g})"]
        if report.wigner is not None:
            lines.append(
                "analytic Wigner vs numeric parity trace: derived form {:.3g}, expanded form {:.3g}".format(
                    report.wigner["derived"], report.wigner["expanded"]
                )
            )
            if report.wigner["expanded"] > 1e-6:
                lines.append("note: the expanded closed form deviates here; the numeric parity trace is used for optimization")
        lines.append("FAIL" if report.failed else "PASS")
        _report(lines, args.out)
        return EXIT_TOLERANCE if report.failed else EXIT_OK

    if args.command == "bell-max" and "bell_max" not in config.outputs:
        config = replace(config, outputs=tuple(q for q in QUANTITIES if q in config.outputs or q == "bell_max"))
    result = run_sweep(config, threads=args.threads, settings=args.command == "bell-max")
    _emit(format_csv(result.columns, result.rows, header_lines(config, result.cutoff, args.command)), args.out)
    _report(summary_lines(result), args.out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
