"""Validation pipelines: resource assumptions and user-supplied Kraus families."""

import logging
from pathlib import Path
from typing import Any, Literal

from corrspace.core.channels import load_kraus_file
from corrspace.core.linalg import choi_psd_check, operator_norm, tp_deviation
from corrspace.core.measurement import (
    MeasurementBasis,
    aklt_rotation_basis,
    computational_basis,
    general_basis,
)
from corrspace.core.resource import MpsResource, open_resource, validate_resource
from corrspace.protocols.protocol_factory import ProtocolFactory
from corrspace.utils.common import build_failure_response, build_success_response
from corrspace.utils.config import TP_TOL
from corrspace.utils.serialization import matrix_to_json

BasisKind = Literal["general", "computational", "aklt", "protocol"]


def _basis_for(
    kind: str, res: MpsResource, theta: float, phi: float
) -> MeasurementBasis:
    d = res.d
    if kind == "general":
        return general_basis(theta, phi, d)
    if kind == "protocol":
        # step-1 basis of the resource's default protocol at angle theta
        name = ProtocolFactory.default_for(res)
        params: dict = {"angles": (theta, 0.0, 0.0)}
        if name == "aklt":
            params = {"theta": theta, "r": 1}
        return ProtocolFactory.get_protocol(name, res, **params).basis(1, ())
    if kind == "computational":
        return computational_basis(d)
    if kind == "aklt":
        return aklt_rotation_basis(theta)
    raise ValueError(
        f"unknown basis {kind!r}; use general, computational, aklt or protocol"
    )


def run_validate_resource_pipeline(
    resource: str,
    basis: BasisKind = "general",
    theta: float = 1.0,
    phi: float = 0.0,
    tol: float = TP_TOL,
) -> dict[str, Any]:
    """Check the proportional-unitary assumption of a resource on one basis.

    Returns:
        ``success``, ``report`` and ``exit_code``; exit code 1 when the
        assumption fails
    """
    try:
        res = open_resource(resource)
        measurement = _basis_for(basis, res, theta, phi)
        validation = validate_resource(res, measurement, tol)
        report = {
            "resource": res.name,
            "d": res.d,
            "D": res.bond_dim,
            "basis": measurement.to_json(),
            **validation.to_json(),
        }
        logging.info(
            "[Validation Pipeline] %s overall=%s", res.name, validation.overall
        )
        return build_success_response(report, validation.overall)
    except Exception as e:
        logging.exception("[Validation Pipeline] Error: %s", e)
        return build_failure_response(e)


def run_check_cptp_pipeline(kraus_file: str, tol: float = TP_TOL) -> dict[str, Any]:
    """Trace-preservation and Choi positivity of a Kraus family read from TOML.

    Returns:
        ``success``, ``report`` and ``exit_code``; exit code 1 when either
        check fails
    """
    try:
        kraus = load_kraus_file(Path(kraus_file).read_text(encoding="utf-8"))
        deviation = tp_deviation(kraus)
        deviation_norm = operator_norm(deviation)
        trace_preserving = deviation_norm <= tol
        completely_positive = choi_psd_check(kraus, tol)
        report = {
            "n_kraus": len(kraus),
            "dim": kraus.dim,
            "weights": list(kraus.weights),
            "nonnegative_weights": kraus.has_nonnegative_weights,
            "tp_deviation": matrix_to_json(deviation),
            "tp_deviation_norm": deviation_norm,
            "trace_preserving": trace_preserving,
            "choi_psd": completely_positive,
        }
        logging.info(
            "[Validation Pipeline] %s: TP=%s, CP=%s",
            kraus_file,
            trace_preserving,
            completely_positive,
        )
        return build_success_response(report, trace_preserving and completely_positive)
    except Exception as e:
        logging.exception("[Validation Pipeline] Error: %s", e)
        return build_failure_response(e)
