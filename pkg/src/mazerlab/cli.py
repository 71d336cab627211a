"""Command-line front end: one subcommand per scenario.

Exit codes: 0 success, 2 configuration problem, 3 numerical failure.
"""

import argparse
import json
import sys
from typing import List, Optional

from .config import SCENARIOS, apply_overrides, parse_config
from .errors import (
    ConfigError,
    DegenerateThresholdError,
    GridMismatchError,
    InvalidParameterError,
    NumericalDegeneracyError,
    OutOfValidityError,
    PacketSpecError,
    StabilityError,
)
from .runner import resolve_jobs, run

__all__ = ["main", "build_parser"]

_UNITS_EPILOG = """\
unit system:
  hbar = 1 and 2M = 1, so the kinetic operator is -d^2/dz^2; the coupling
  lambda is the energy unit (gamma = sqrt(lambda), lengths in 1/gamma);
  the detuning delta and mode frequency omega share the energy unit.
  Probabilities are dimensionless; flux weights carry k_g/k.

configuration:
  values load from --config JSON and are overridden by repeated
  --set key=value (dots select nested keys, e.g. --set packet.k0=1.5).
"""

_CONFIG_ERRORS = (ConfigError, InvalidParameterError, PacketSpecError,
                  OutOfValidityError, GridMismatchError)
_NUMERICAL_ERRORS = (NumericalDegeneracyError, StabilityError,
                     DegenerateThresholdError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mazerlab",
        description="Simulator and verification workbench for a two-level "
                    "atom crossing a single-mode mesa cavity.",
        epilog=_UNITS_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="scenario", metavar="scenario")
    sub.required = True
    help_lines = {
        "residual": "defect of the published state under the true coupled equations",
        "residual-sweep": "the same defect over a detuning list",
        "stationary": "true coupled-channel scattering probabilities",
        "propagate": "wave-packet time evolution and inversion series",
        "audit": "off-diagonal coupling curves in both bases",
        "resonant-probabilities": "published-solution probabilities at delta = 0",
    }
    for name in SCENARIOS:
        p = sub.add_parser(name, help=help_lines[name],
                           epilog=_UNITS_EPILOG,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", metavar="PATH", default=None,
                       help="JSON configuration file")
        p.add_argument("--set", metavar="KEY=VALUE", action="append",
                       dest="overrides", default=[],
                       help="override a config key (repeatable, dotted nesting)")
        p.add_argument("--jobs", type=int, default=None,
                       help="worker processes for sweeps "
                            "(default: MAZERLAB_JOBS or processor count)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            try:
                with open(args.config, "r", encoding="utf-8") as fh:
                    raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(
                    f"config {args.config!r} is not valid JSON: {exc.msg} "
                    f"(line {exc.lineno}, column {exc.colno})")
            if not isinstance(raw, dict):
                raise ConfigError("configuration root must be a JSON object")
        else:
            raw = {}
        declared = raw.get("scenario")
        if declared is not None and declared != args.scenario:
            raise ConfigError(
                f"config declares scenario {declared!r} but the command line "
                f"selected {args.scenario!r}")
        raw["scenario"] = args.scenario
        if args.overrides:
            raw = apply_overrides(raw, args.overrides)
        config = parse_config(raw)
        jobs = resolve_jobs(args.jobs)
    except _CONFIG_ERRORS as exc:
        print(f"mazerlab: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"mazerlab: config error: {exc}", file=sys.stderr)
        return 2

    try:
        manifest = run(config, jobs=jobs)
    except _NUMERICAL_ERRORS as exc:
        print(f"mazerlab: numerical failure: {exc}", file=sys.stderr)
        return 3
    except _CONFIG_ERRORS as exc:
        print(f"mazerlab: config error: {exc}", file=sys.stderr)
        return 2

    for entry in manifest["artifacts"]:
        print(f"wrote {config.output_dir}/{entry['path']}")
    print(f"wrote {config.output_dir}/manifest.json")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
