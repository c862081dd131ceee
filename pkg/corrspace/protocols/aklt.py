"""Z-rotation protocol on the one-dimensional AKLT state."""

from typing import Any

from corrspace.core.linalg import CMatrix, pauli_byproduct, s_z
from corrspace.core.measurement import (
    MeasurementBasis,
    RecordLike,
    aklt_adaptive_basis,
    record_outcomes,
)
from corrspace.core.resource import MpsResource
from corrspace.protocols.base_protocol import MeasurementProtocol
from corrspace.simulation.combinat import parity_f, parity_g


class AKLTRotationProtocol(MeasurementProtocol):
    """Repeats ``M_{theta, pi/2}`` until an outcome other than 2 appears.

    Every history except the all-2 one implements ``X^f Z^g S_Z(theta)``; the
    all-2 history implements ``Z^r``.
    """

    name = "aklt"
    physical_dim = 3

    def __init__(self, resource: MpsResource, theta: float, r: int):
        super().__init__(resource)
        if r < 1:
            raise ValueError(f"AKLT protocol needs r >= 1, got {r}")
        self.theta = float(theta)
        self.r = int(r)

    @property
    def n_steps(self) -> int:
        return self.r

    def basis(self, step: int, record: RecordLike) -> MeasurementBasis:
        if not 1 <= step <= self.r:
            raise ValueError(f"step {step} outside 1..{self.r}")
        return aklt_adaptive_basis(record_outcomes(record)[: step - 1], self.theta)

    def flag(self, record: RecordLike) -> tuple[int, int]:
        outcomes = record_outcomes(record)
        return parity_f(outcomes), parity_g(outcomes)

    def target_operator(self, flag: tuple[int, int]) -> CMatrix:
        return pauli_byproduct(*flag) @ s_z(self.theta)

    def params(self) -> dict[str, Any]:
        return {**super().params(), "theta": self.theta, "r": self.r}
