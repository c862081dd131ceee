"""Command-line entry point.

Every command writes one JSON report (CSV for count tables on request) that
embeds the tool version, the run configuration and the tolerances in use.
Exit codes: 0 success, 1 scientific assertion failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np

from corrspace.pipelines.counts_pipeline import run_counts_pipeline
from corrspace.pipelines.oracle_pipeline import run_oracle_compare_pipeline
from corrspace.pipelines.simulate_pipeline import run_simulate_pipeline
from corrspace.pipelines.theorem_scan_pipeline import run_theorem_scan_pipeline
from corrspace.pipelines.validation_pipeline import (
    run_check_cptp_pipeline,
    run_validate_resource_pipeline,
)
from corrspace.utils.common import render_json, write_report
from corrspace.utils.config import (
    DEFAULT_AKLT_STEPS,
    DEFAULT_ORACLE_SITES,
    DEFAULT_RANDOM_KRAUS,
    DEFAULT_SEED,
    EXIT_USAGE_ERROR,
    SUPPORTED_PROTOCOLS,
    TOOL_NAME,
    TP_TOL,
    VERSION,
    tolerance_table,
)
from corrspace.utils.errors import ConfigError
from corrspace.utils.serialization import load_toml_text
from corrspace.utils.setup import setup_logging, setup_run_directory

COMMANDS = (
    "simulate",
    "counts",
    "theorem-scan",
    "oracle-compare",
    "validate-resource",
    "check-cptp",
)
# Fields that steer where a report goes; they are left out of the report body
_DELIVERY_FIELDS = ("output", "save", "verbose", "config")
_RESOURCE_COMMANDS = ("simulate", "theorem-scan", "oracle-compare", "validate-resource")


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration of one command."""

    command: str
    resource: str | None = None
    protocol: str = "auto"
    angles: tuple[float, float, float] = (0.0, 0.0, 0.0)
    theta: float | None = None
    phi: float = 0.0
    r: int | None = None
    n: int = DEFAULT_ORACLE_SITES
    error: str = "none"
    error_file: str | None = None
    n_kraus: int = DEFAULT_RANDOM_KRAUS
    seed: int = DEFAULT_SEED
    fast_path: bool = False
    tp_tol: float = TP_TOL
    r_min: int = 1
    r_max: int = 8
    format: str = "json"
    basis: str = "general"
    kraus_file: str | None = None
    dump_diagnostics: bool = False
    output: str | None = None
    save: bool = False
    verbose: bool = False
    config: str | None = None

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if len(self.angles) != 3:
            raise ConfigError(f"angles needs 3 values, got {len(self.angles)}")
        if self.protocol not in ("auto", *SUPPORTED_PROTOCOLS):
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if not self.tp_tol > 0:
            raise ConfigError(f"tp_tol must be positive, got {self.tp_tol}")
        if self.n_kraus < 1:
            raise ConfigError(f"n_kraus must be positive, got {self.n_kraus}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")
        if self.command in _RESOURCE_COMMANDS and not self.resource:
            raise ConfigError(f"{self.command} needs --resource")
        if self.command == "check-cptp" and not self.kraus_file:
            raise ConfigError("check-cptp needs --kraus-file")

    def to_json(self) -> dict[str, Any]:
        document = asdict(self)
        document["angles"] = list(self.angles)
        for key in _DELIVERY_FIELDS:
            document.pop(key)
        return document


# === Argument parsing ===

def _parse_angles(text: str) -> tuple[float, float, float]:
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid angles {text!r}") from e
    if len(values) != 3:
        raise argparse.ArgumentTypeError("angles needs three comma-separated values")
    return values  # type: ignore[return-value]


def _add_resource(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--resource", help="Built-in name or TOML resource file")


def _add_protocol_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--protocol",
        choices=("auto", *SUPPORTED_PROTOCOLS),
        help="Measurement protocol (default: auto from the resource)",
    )
    parser.add_argument(
        "--angles", type=_parse_angles, help="Gate angles a,b,c (default: 0,0,0)"
    )
    parser.add_argument("--theta", type=float, help="AKLT rotation angle (default: 0)")
    parser.add_argument(
        "--r", type=int, help=f"AKLT steps (default: {DEFAULT_AKLT_STEPS})"
    )


def _add_error_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--error",
        help="none, identity, random, paper-aklt, paper-aklt-v2, exchange:a,b, "
        "phase:s, depolarizing:p or file (default: none)",
    )
    parser.add_argument("--error-file", help="TOML error or Kraus file")
    parser.add_argument(
        "--n-kraus",
        type=int,
        help=f"Kraus rank of a random error (default: {DEFAULT_RANDOM_KRAUS})",
    )
    parser.add_argument(
        "--seed", type=int, help=f"Seed of a random error (default: {DEFAULT_SEED})"
    )


def build_parser() -> argparse.ArgumentParser:
    """Parser whose options are absent from the namespace unless given."""
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="TOML file supplying any of the flags")
    common.add_argument("--output", help="Report file (default: stdout)")
    common.add_argument(
        "--save", action="store_true", help="Also write the report into a run directory"
    )
    common.add_argument("--verbose", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Exact simulation of correlation-space errors in MBQC",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(
            name,
            help=help_text,
            parents=[common],
            argument_default=argparse.SUPPRESS,
        )

    simulate = add("simulate", "Induced map of a protocol under a site-1 error")
    _add_resource(simulate)
    _add_protocol_options(simulate)
    _add_error_options(simulate)
    simulate.add_argument(
        "--fast-path", action="store_true", help="Closed-form counts for AKLT"
    )
    simulate.add_argument(
        "--tp-tol", type=float, help=f"TP tolerance (default: {TP_TOL})"
    )

    counts = add("counts", "Closed-form outcome counts against enumeration")
    counts.add_argument("--r-max", type=int, help="Largest r (default: 8)")
    counts.add_argument("--r-min", type=int, help="Smallest r (default: 1)")
    counts.add_argument("--format", choices=("json", "csv"), help="Output format")

    scan = add("theorem-scan", "Search for a non-TP branch under a unitary error")
    _add_resource(scan)
    scan.add_argument("--theta", type=float, help="Polar angle in (0, pi)")
    scan.add_argument("--phi", type=float, help="Azimuthal angle (default: 0)")
    scan.add_argument(
        "--dump-diagnostics", action="store_true", help="Include intermediate scalars"
    )

    oracle = add("oracle-compare", "Compare with a dense simulation of the chain")
    _add_resource(oracle)
    oracle.add_argument(
        "--n", type=int, help=f"Chain length (default: {DEFAULT_ORACLE_SITES})"
    )
    _add_protocol_options(oracle)
    _add_error_options(oracle)
    oracle.add_argument("--tp-tol", type=float, help="Deviation tolerance")

    validate = add("validate-resource", "Check the proportional-unitary assumption")
    _add_resource(validate)
    validate.add_argument(
        "--basis",
        choices=("general", "computational", "aklt", "protocol"),
        help="Measurement basis (default: general)",
    )
    validate.add_argument("--theta", type=float, help="Polar angle")
    validate.add_argument("--phi", type=float, help="Azimuthal angle")

    check = add("check-cptp", "TP and Choi positivity of a Kraus file")
    check.add_argument("--kraus-file", help="TOML file with kraus and weights")
    check.add_argument("--tp-tol", type=float, help="TP tolerance")
    return parser


# === Configuration ===

_FIELD_NAMES = {f.name for f in fields(RunConfig)}


def _coerce(key: str, value: Any) -> Any:
    if key == "angles":
        if not isinstance(value, list | tuple):
            raise ConfigError("angles must be a list of three numbers")
        return tuple(float(v) for v in value)
    return value


def load_config_file(path: str) -> dict[str, Any]:
    """Read flag values from a TOML file with top-level keys named like the flags.

    Raises:
        ConfigError: If the file holds keys that are not run options
    """
    document = load_toml_text(Path(path).read_text(encoding="utf-8"))
    values = {key.replace("-", "_"): value for key, value in document.items()}
    unknown = set(values) - (_FIELD_NAMES - {"command", "config"})
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return {key: _coerce(key, value) for key, value in values.items()}


def build_config(namespace: argparse.Namespace) -> RunConfig:
    """Merge defaults, config-file values and flags, in increasing priority."""
    flags = vars(namespace)
    merged: dict[str, Any] = {}
    if flags.get("config"):
        merged.update(load_config_file(flags["config"]))
    merged.update(flags)
    return RunConfig(**merged)


# === Commands ===

def _theta(config: RunConfig, default: float) -> float:
    return default if config.theta is None else config.theta


def _cmd_simulate(config: RunConfig) -> dict[str, Any]:
    assert config.resource is not None
    return run_simulate_pipeline(
        config.resource,
        protocol=config.protocol,
        angles=config.angles,
        theta=_theta(config, 0.0),
        r=DEFAULT_AKLT_STEPS if config.r is None else config.r,
        error=config.error,
        error_file=config.error_file,
        n_kraus=config.n_kraus,
        seed=config.seed,
        fast_path=config.fast_path,
        tp_tol=config.tp_tol,
    )


def _cmd_counts(config: RunConfig) -> dict[str, Any]:
    output_format = "csv" if config.format == "csv" else "json"
    return run_counts_pipeline(config.r_max, config.r_min, output_format)


def _cmd_theorem_scan(config: RunConfig) -> dict[str, Any]:
    assert config.resource is not None
    return run_theorem_scan_pipeline(
        config.resource, _theta(config, np.pi / 2), config.phi, config.dump_diagnostics
    )


def _cmd_oracle_compare(config: RunConfig) -> dict[str, Any]:
    assert config.resource is not None
    return run_oracle_compare_pipeline(
        config.resource,
        n=config.n,
        protocol=config.protocol,
        angles=config.angles,
        theta=_theta(config, 0.0),
        r=config.r,
        error=config.error,
        error_file=config.error_file,
        n_kraus=config.n_kraus,
        seed=config.seed,
        tol=config.tp_tol,
    )


def _cmd_validate_resource(config: RunConfig) -> dict[str, Any]:
    assert config.resource is not None
    return run_validate_resource_pipeline(
        config.resource,
        config.basis,  # type: ignore[arg-type]
        _theta(config, np.pi / 2),
        config.phi,
        config.tp_tol,
    )


def _cmd_check_cptp(config: RunConfig) -> dict[str, Any]:
    assert config.kraus_file is not None
    return run_check_cptp_pipeline(config.kraus_file, config.tp_tol)


_DISPATCH: dict[str, Callable[[RunConfig], dict[str, Any]]] = {
    "simulate": _cmd_simulate,
    "counts": _cmd_counts,
    "theorem-scan": _cmd_theorem_scan,
    "oracle-compare": _cmd_oracle_compare,
    "validate-resource": _cmd_validate_resource,
    "check-cptp": _cmd_check_cptp,
}


def build_envelope(config: RunConfig, report: dict[str, Any]) -> dict[str, Any]:
    """Wrap a report with the tool version, configuration and tolerances."""
    tolerances = tolerance_table()
    tolerances["tp"] = config.tp_tol
    return {
        "tool": TOOL_NAME,
        "version": VERSION,
        "command": config.command,
        "config": config.to_json(),
        "tolerances": tolerances,
        "report": report,
    }


def _deliver(config: RunConfig, text: str) -> None:
    if config.output:
        write_report(config.output, text)
    else:
        sys.stdout.write(text)
    if config.save:
        is_csv = config.format == "csv" and config.command == "counts"
        suffix = "csv" if is_csv else "json"
        write_report(setup_run_directory() / f"{config.command}.{suffix}", text)


def run_command(config: RunConfig) -> int:
    """Dispatch a validated configuration, deliver its report, return the exit code."""
    response = _DISPATCH[config.command](config)
    if not response.get("success", False):
        logging.error("[CLI] %s failed: %s", config.command, response.get("error"))
        return int(response.get("exit_code", EXIT_USAGE_ERROR))

    report = response["report"]
    if config.command == "counts" and config.format == "csv":
        text = report["csv"]
    else:
        text = render_json(build_envelope(config, report))
    _deliver(config, text)
    return int(response["exit_code"])


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, configure logging and run one command."""
    parser = build_parser()
    namespace = parser.parse_args(argv)
    setup_logging(verbose=bool(getattr(namespace, "verbose", False)))
    try:
        config = build_config(namespace)
    except (ConfigError, ValueError, OSError, TypeError) as e:
        parser.print_usage(sys.stderr)
        logging.error("[CLI] Invalid configuration: %s", e)
        return EXIT_USAGE_ERROR
    return run_command(config)


if __name__ == "__main__":
    sys.exit(main())
