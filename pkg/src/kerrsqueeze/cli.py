"""Command-line experiment driver.

    kerrsqueeze <experiment> [--config FILE] [flags...]

Flags override values from the JSON config file; each experiment fills in
its own documented defaults afterwards.  Exit codes: 0 success, 2 usage or
configuration error, 3 numerical failure (a machine-readable error record is
written to stderr in both failure cases).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .errors import ConfigError, KerrSqueezeError
from .experiments import (
    EXPERIMENTS,
    config_from_mapping,
    run_experiment,
    write_result,
)

_FLAG_HELP = {
    "alpha": "input coherent amplitude (mean photon number alpha^2)",
    "phi0": "cross-phase-modulation angle in radians",
    "t": "variable-beam-splitter transmissivity, 1/sqrt(2) <= t <= 1",
    "delta": "compensation phase in radians, or 'auto' for full compensation",
    "fidelity_target": "target fidelity for the transmissivity search",
    "wavelength": "optical wavelength in meters",
    "flux": "photon flux in photons per second",
    "pulse_width": "pulse duration in seconds (peak-power conversions)",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kerrsqueeze",
        description="Reproducible phase-squeezing experiments for the "
        "post-selected cross-Kerr interferometer model.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", default=None, help="JSON config file; flags override it")
        for flag in ("alpha", "phi0", "t", "fidelity_target", "wavelength", "flux", "pulse_width"):
            p.add_argument(f"--{flag.replace('_', '-')}", type=float, default=None,
                           dest=flag, help=_FLAG_HELP[flag])
        p.add_argument("--delta", default=None, help=_FLAG_HELP["delta"])
        p.add_argument("--t-grid", default=None, dest="t_grid", metavar="MIN:MAX:N",
                       help="transmissivity grid for sweeps")
        p.add_argument("--p-grid", default=None, dest="p_grid", metavar="MIN:MAX:N",
                       help="quadrature grid for density profiles")
        p.add_argument("--out", default=None, dest="output_path", help="output file path")
        p.add_argument("--format", default=None, choices=("csv", "json"),
                       help="output format (experiment-specific default)")
        p.add_argument("--align-peaks", action=argparse.BooleanOptionalAction,
                       default=None, dest="align_peaks",
                       help="shift the reference density to align its peak")
    return parser


def _error_record(exc: Exception) -> str:
    return json.dumps(
        {"error": {"type": type(exc).__name__, "message": str(exc)}}, sort_keys=True
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    mapping = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                mapping = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(_error_record(ConfigError(f"cannot read config: {exc}")), file=sys.stderr)
            return 2
        if not isinstance(mapping, dict):
            print(_error_record(ConfigError("config file must hold a JSON object")),
                  file=sys.stderr)
            return 2
    mapping["experiment"] = args.experiment
    for key in (
        "alpha", "phi0", "t", "delta", "fidelity_target", "t_grid", "p_grid",
        "wavelength", "flux", "pulse_width", "output_path", "format", "align_peaks",
    ):
        value = getattr(args, key)
        if value is not None:
            mapping[key] = value

    try:
        cfg = config_from_mapping(mapping)
    except ConfigError as exc:
        print(_error_record(exc), file=sys.stderr)
        return 2

    try:
        result = run_experiment(cfg)
    except ConfigError as exc:
        print(_error_record(exc), file=sys.stderr)
        return 2
    except KerrSqueezeError as exc:
        print(_error_record(exc), file=sys.stderr)
        return 3

    out_path = cfg.output_path or f"{result.default_name}.{result.fmt}"
    write_result(result, out_path)
    size = len(result.rows) if result.rows is not None else 1
    print(f"wrote {out_path} ({size} row{'s' if size != 1 else ''})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
