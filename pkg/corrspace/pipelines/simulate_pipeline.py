"""Simulate pipeline: run a protocol under a site-1 error, report the induced map."""

import logging
from pathlib import Path
from typing import Any

from corrspace.core.channels import (
    ErrorSpec,
    load_error_spec,
    load_kraus_file,
    validate_channel,
)
from corrspace.core.linalg import KrausSet
from corrspace.core.resource import MpsResource, open_resource
from corrspace.protocols.protocol_factory import ProtocolFactory
from corrspace.simulation.ensemble import (
    InducedMapReport,
    run_aklt_rotation,
    run_cluster,
    run_tricluster,
)
from corrspace.utils.common import build_failure_response, build_success_response
from corrspace.utils.config import (
    DEFAULT_AKLT_STEPS,
    DEFAULT_RANDOM_KRAUS,
    DEFAULT_SEED,
    SUPPORTED_ERROR_KINDS,
    TP_TOL,
)
from corrspace.utils.serialization import load_toml_text

# Protocols whose induced map is asserted to be CPTP for every error
TP_ASSERTED_PROTOCOLS = ("cluster", "tricluster")

# === Helper functions (Single Responsibility) ===

def _split_option(option: str) -> tuple[str, list[str]]:
    kind, _, raw = option.partition(":")
    args = [part.strip() for part in raw.split(",")] if raw else []
    return kind.strip().lower(), args


def _load_error_file(error_file: str | None) -> ErrorSpec | KrausSet:
    if not error_file:
        raise ValueError("--error file needs --error-file")
    text = Path(error_file).read_text(encoding="utf-8")
    if "error" in load_toml_text(text):
        return load_error_spec(text)
    return validate_channel(load_kraus_file(text))


def resolve_error(
    option: str,
    error_file: str | None = None,
    n_kraus: int = DEFAULT_RANDOM_KRAUS,
    seed: int = DEFAULT_SEED,
) -> ErrorSpec | KrausSet | None:
    """Turn an ``--error`` option into an error description.

    Args:
        option: ``none``, ``identity``, ``random``, ``paper-aklt``,
            ``paper-aklt-v2``, ``exchange:a,b``, ``phase:s``,
            ``depolarizing:p`` or ``file``
        error_file: TOML file with an ``[error]`` table or a Kraus list
        n_kraus: Number of Kraus elements of a random error
        seed: Seed of a random error

    Returns:
        ``None`` for no error, otherwise a specification or a Kraus set

    Raises:
        ValueError: If the kind is unknown or its arguments are malformed
    """
    kind, args = _split_option(option)
    if kind not in SUPPORTED_ERROR_KINDS:
        raise ValueError(
            "Unsupported error kind: {}. Supported kinds: {}".format(
                option, ", ".join(SUPPORTED_ERROR_KINDS)
            )
        )
    try:
        if kind == "none":
            return None
        if kind == "file":
            return _load_error_file(error_file)
        if kind == "random":
            return ErrorSpec("random", {"n_kraus": n_kraus, "seed": seed})
        if kind == "exchange":
            a, b = (int(x) for x in args)
            return ErrorSpec("exchange", {"a": a, "b": b})
        if kind == "phase":
            (s,) = (int(x) for x in args)
            return ErrorSpec("phase_power", {"s": s})
        if kind == "depolarizing":
            (p,) = (float(x) for x in args)
            return ErrorSpec("depolarizing", {"p": p})
    except ValueError as e:
        raise ValueError(f"malformed error option {option!r}: {e}") from e
    return ErrorSpec(kind.replace("-", "_"))


def _run_protocol(
    protocol_name: str,
    res: MpsResource,
    err: ErrorSpec | KrausSet | None,
    angles: tuple[float, float, float],
    theta: float,
    r: int,
    fast_path: bool,
    tol: float,
) -> InducedMapReport:
    if protocol_name == "cluster":
        return run_cluster(angles, err, res, tol)
    if protocol_name == "tricluster":
        return run_tricluster(angles, err, res, tol)
    return run_aklt_rotation(theta, r, err, fast_path, res, tol)


# === Public API ===

def run_simulate_pipeline(
    resource: str,
    protocol: str = "auto",
    angles: tuple[float, float, float] = (0.0, 0.0, 0.0),
    theta: float = 0.0,
    r: int = DEFAULT_AKLT_STEPS,
    error: str = "none",
    error_file: str | None = None,
    n_kraus: int = DEFAULT_RANDOM_KRAUS,
    seed: int = DEFAULT_SEED,
    fast_path: bool = False,
    tp_tol: float = TP_TOL,
) -> dict[str, Any]:
    """Run the ensemble simulation and classify the induced map.

    Args:
        resource: Built-in name or TOML resource file
        protocol: ``auto``, ``cluster``, ``aklt`` or ``tricluster``
        angles: Gate angles of the cluster and tricluster protocols
        theta: Rotation angle of the AKLT protocol
        r: Number of AKLT steps
        error: Error option, see ``resolve_error``
        error_file: File for ``--error file``
        n_kraus: Kraus rank of a random error
        seed: Seed of a random error
        fast_path: Use closed-form counts for the AKLT protocol
        tp_tol: Tolerance of the TP verdict

    Returns:
        ``success``, ``report`` and ``exit_code``; the exit code is 1 when a
        protocol asserted to be CPTP yields another verdict
    """
    try:
        res = open_resource(resource)
        protocol_name = ProtocolFactory.get_protocol_name(protocol, res)
        err = resolve_error(error, error_file, n_kraus, seed)
        logging.info(
            "[Simulate Pipeline] %s on %s with error %s", protocol_name, res.name, error
        )
        report = _run_protocol(
            protocol_name, res, err, angles, theta, r, fast_path, tp_tol
        )
        passed = protocol_name not in TP_ASSERTED_PROTOCOLS or report.verdict == "cptp"
        if not passed:
            logging.error(
                "[Simulate Pipeline] %s is asserted CPTP but the verdict is %s",
                protocol_name,
                report.verdict,
            )
        return build_success_response(report.to_json(), passed)
    except Exception as e:
        logging.exception("[Simulate Pipeline] Error: %s", e)
        return build_failure_response(e)
