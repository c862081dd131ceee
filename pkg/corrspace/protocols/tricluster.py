"""Three-gate protocol on the tricluster state (six-level sites)."""

from typing import Any

from corrspace.core.linalg import CMatrix, j_gate, pauli_byproduct
from corrspace.core.measurement import (
    MeasurementBasis,
    RecordLike,
    record_outcomes,
    tricluster_adaptive_basis,
    tricluster_p,
    tricluster_q,
)
from corrspace.core.resource import MpsResource
from corrspace.protocols.base_protocol import MeasurementProtocol


class TriclusterProtocol(MeasurementProtocol):
    """Implements ``X^{p(s_3)} Z^{q(s_3)+p(s_2)} J(eta) J(phi) J(theta)``."""

    name = "tricluster"
    physical_dim = 6

    def __init__(self, resource: MpsResource, angles: tuple[float, float, float]):
        super().__init__(resource)
        if len(angles) != 3:
            raise ValueError(f"tricluster protocol needs 3 angles, got {len(angles)}")
        self.angles = tuple(float(a) for a in angles)

    @property
    def n_steps(self) -> int:
        return 3

    def basis(self, step: int, record: RecordLike) -> MeasurementBasis:
        return tricluster_adaptive_basis(step, record, self.angles[step - 1])

    def flag(self, record: RecordLike) -> tuple[int, int]:
        _, s2, s3 = record_outcomes(record)
        return tricluster_p(s3), tricluster_q(s3) ^ tricluster_p(s2)

    def target_operator(self, flag: tuple[int, int]) -> CMatrix:
        theta, phi, eta = self.angles
        return pauli_byproduct(*flag) @ j_gate(eta) @ j_gate(phi) @ j_gate(theta)

    def params(self) -> dict[str, Any]:
        return {**super().params(), "angles": list(self.angles)}
