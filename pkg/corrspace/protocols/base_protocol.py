"""Base interface for adaptive measurement protocols."""

from abc import ABC, abstractmethod
from typing import Any

from corrspace.core.linalg import CMatrix
from corrspace.core.measurement import MeasurementBasis, RecordLike
from corrspace.core.resource import MpsResource
from corrspace.utils.errors import DimensionError


class MeasurementProtocol(ABC):
    """Abstract base class for record-dependent measurement sequences.

    Step ``k`` (1-based) measures physical site ``k`` in ``basis(k, record)``,
    where ``record`` holds the outcomes of steps ``1..k-1``. A physical error,
    when present, acts on site 1 before the first measurement.
    """

    name: str = "protocol"
    physical_dim: int = 0

    def __init__(self, resource: MpsResource):
        if resource.d != self.physical_dim:
            raise DimensionError(
                f"{self.name} protocol needs d={self.physical_dim}, "
                f"resource {resource.name} has d={resource.d}"
            )
        self.resource = resource

    @property
    @abstractmethod
    def n_steps(self) -> int:
        """Number of measured sites."""

    @abstractmethod
    def basis(self, step: int, record: RecordLike) -> MeasurementBasis:
        """Measurement basis of ``step`` given the earlier outcomes."""

    @abstractmethod
    def flag(self, record: RecordLike) -> tuple[int, int]:
        """Byproduct label ``(p, q)`` of a complete record."""

    @abstractmethod
    def target_operator(self, flag: tuple[int, int]) -> CMatrix:
        """Ideal no-error correlation-space operator of a flag sector."""

    def params(self) -> dict[str, Any]:
        return {"name": self.name, "n_steps": self.n_steps}
