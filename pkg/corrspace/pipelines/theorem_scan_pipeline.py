"""Theorem scan pipeline: look for a unitary error that makes a branch non-TP."""

import logging
from typing import Any

from corrspace.core.resource import open_resource
from corrspace.simulation.trajectory import theorem_scan
from corrspace.utils.common import build_failure_response, build_success_response


def run_theorem_scan_pipeline(
    resource: str, theta: float, phi: float, dump_diagnostics: bool = False
) -> dict[str, Any]:
    """Run the witness search at one measurement angle.

    Returns:
        ``success``, ``report`` and ``exit_code``. A missing witness is the
        expected answer for ``d = 2`` and a failure (exit code 1) for ``d >= 3``.
    """
    try:
        res = open_resource(resource)
        diagnostics: dict[str, Any] | None = {} if dump_diagnostics else None
        witness = theorem_scan(res, theta, phi, diagnostics)
        report: dict[str, Any] = {
            "resource": res.name,
            "d": res.d,
            "theta": theta,
            "phi": phi,
            "witness": witness.to_json() if witness else None,
            "result": "witness" if witness else "no witness",
        }
        if diagnostics is not None:
            report["diagnostics"] = diagnostics
        passed = witness is not None or res.d < 3
        logging.info("[Theorem Pipeline] %s: %s", res.name, report["result"])
        return build_success_response(report, passed)
    except Exception as e:
        logging.exception("[Theorem Pipeline] Error: %s", e)
        return build_failure_response(e)
