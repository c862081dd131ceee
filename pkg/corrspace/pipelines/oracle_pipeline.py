"""Oracle pipeline: cross-check the correlation-space prediction on a dense chain."""

import logging
from typing import Any

from corrspace.core.resource import open_resource
from corrspace.pipelines.simulate_pipeline import resolve_error
from corrspace.protocols.protocol_factory import ProtocolFactory
from corrspace.simulation.oracle import oracle_comparison
from corrspace.utils.common import build_failure_response, build_success_response
from corrspace.utils.config import (
    DEFAULT_ORACLE_SITES,
    DEFAULT_RANDOM_KRAUS,
    DEFAULT_SEED,
    TP_TOL,
)


def run_oracle_compare_pipeline(
    resource: str,
    n: int = DEFAULT_ORACLE_SITES,
    protocol: str = "auto",
    angles: tuple[float, float, float] = (0.0, 0.0, 0.0),
    theta: float = 0.0,
    r: int | None = None,
    error: str = "none",
    error_file: str | None = None,
    n_kraus: int = DEFAULT_RANDOM_KRAUS,
    seed: int = DEFAULT_SEED,
    tol: float = TP_TOL,
) -> dict[str, Any]:
    """Compare every history on an ``n``-site chain.

    Args:
        r: AKLT steps; defaults to ``n - 1``

    Returns:
        ``success``, ``report`` and ``exit_code``; the exit code is 1 when the
        largest deviation reaches ``tol``
    """
    try:
        res = open_resource(resource)
        name = ProtocolFactory.get_protocol_name(protocol, res)
        params: dict[str, Any] = (
            {"theta": theta, "r": n - 1 if r is None else r}
            if name == "aklt"
            else {"angles": angles}
        )
        bound = ProtocolFactory.get_protocol(name, res, **params)
        err = resolve_error(error, error_file, n_kraus, seed)
        comparison = oracle_comparison(res, bound, err, n)
        passed = comparison.max_deviation < tol
        if not passed:
            logging.error(
                "[Oracle Pipeline] deviation %.3e exceeds %.1e",
                comparison.max_deviation,
                tol,
            )
        return build_success_response(comparison.to_json(), passed)
    except Exception as e:
        logging.exception("[Oracle Pipeline] Error: %s", e)
        return build_failure_response(e)
