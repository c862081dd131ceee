"""Exact simulation of physical errors in the correlation space of MPS resources."""

__all__ = [
    "ErrorSpec",
    "InducedMapReport",
    "KrausSet",
    "MpsResource",
    "ProtocolFactory",
    "builtin",
    "compare_with_correlation",
    "induced_kraus",
    "run_aklt_rotation",
    "run_cluster",
    "run_tricluster",
    "theorem_scan",
    "trajectory_step",
]

from corrspace.core.channels import ErrorSpec, induced_kraus
from corrspace.core.linalg import KrausSet
from corrspace.core.resource import MpsResource, builtin
from corrspace.protocols.protocol_factory import ProtocolFactory
from corrspace.simulation.ensemble import (
    InducedMapReport,
    run_aklt_rotation,
    run_cluster,
    run_tricluster,
)
from corrspace.simulation.oracle import compare_with_correlation
from corrspace.simulation.trajectory import theorem_scan, trajectory_step
