"""Command line entry point: ``nhflows run`` and ``nhflows list``.

Exit status is 0 when every check of the run passes, 1 when a check fails
and 2 on configuration or numerical errors.
"""
from __future__ import annotations

import argparse
import sys

from .config import load_config_file
from .errors import ConfigError, NHFlowsError
from .report import write_outputs
from .scenarios import list_scenarios, run_scenario

EXIT_FAIL = 1
EXIT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nhflows", description="Run nonholonomic flow verification scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario and write CSV series plus a JSON report")
    run.add_argument("--scenario", help="scenario name (see `nhflows list`)")
    run.add_argument("--config", help="JSON config file")
    run.add_argument("--output", help="output directory (overrides output.dir)")
    run.add_argument("--seed", type=int, help="random seed (overrides seed)")
    run.add_argument("--t-final", type=float, dest="t_final", help="integration horizon (overrides integrator.t_final)")
    run.add_argument("--dt", type=float, help="RK4 step (overrides integrator.dt)")
    sub.add_parser("list", help="list the registered scenarios")
    return parser


def _format_table(rows: list[tuple[str, str, str]]) -> str:
    width = max(len(r[0]) for r in rows)
    lines = []
    for name, desc, verifies in rows:
        lines.append(f"{name.ljust(width)}  {desc}")
        lines.append(f"{' ' * width}  verifies: {verifies}")
    return "\n".join(lines)


def cmd_list() -> int:
    print(_format_table(list_scenarios()))
    return 0


def _override(raw: dict, section: str, key: str, value) -> None:
    part = raw.setdefault(section, {})
    if not isinstance(part, dict):
        raise ConfigError(f"{section}: expected an object")
    part[key] = value


def cmd_run(args: argparse.Namespace) -> int:
    raw = load_config_file(args.config) if args.config else {}
    name = args.scenario or raw.get("scenario")
    if not name:
        raise ConfigError("scenario: give --scenario or a `scenario` key in the config")
    if args.seed is not None:
        raw["seed"] = args.seed
    for section, key, value in (("integrator", "t_final", args.t_final), ("integrator", "dt", args.dt),
                                ("output", "dir", args.output)):
        if value is not None:
            _override(raw, section, key, value)
    cfg, result = run_scenario(name, raw, strict_required=args.config is not None)
    path = write_outputs(cfg, result, cfg["output"]["dir"])
    for c in result.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  measured={c.measured:.3e}  {c.comparison} {c.tolerance}")
    print(f"{'PASS' if result.passed else 'FAIL'}  {name}  report: {path}")
    return 0 if result.passed else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            return cmd_list()
        return cmd_run(args)
    except NHFlowsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
