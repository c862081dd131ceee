"""Projective measurement bases, including the record-dependent (adaptive) bases
of the cluster, AKLT and tricluster protocols.

Every basis vector has its global phase fixed so that its first nonzero
component is real and positive.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from corrspace.core.linalg import PAULI_X, PAULI_Z, CMatrix, CVector, basis_ket
from corrspace.utils.config import MAX_PHYSICAL_DIM, ORTHONORMAL_TOL
from corrspace.utils.errors import DimensionError
from corrspace.utils.serialization import vector_to_json

_PHASE_FLOOR = 1e-12


@dataclass(frozen=True)
class OutcomeRecord:
    """Outcomes ``(s_1, s_2, ...)`` in measurement order plus the byproduct flag."""

    outcomes: tuple[int, ...] = ()
    flag: tuple[int, int] | None = None

    def __len__(self) -> int:
        return len(self.outcomes)


RecordLike = OutcomeRecord | Sequence[int]


def record_outcomes(record: RecordLike) -> tuple[int, ...]:
    if isinstance(record, OutcomeRecord):
        return record.outcomes
    return tuple(int(s) for s in record)


def fix_phase(vector: CVector) -> CVector:
    """Rotate ``vector`` so that its first nonzero component is real positive."""
    vec = np.asarray(vector, dtype=np.complex128)
    for component in vec:
        if abs(component) > _PHASE_FLOOR:
            return vec * (abs(component) / component)
    return vec


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """An ordered orthonormal basis of a single qudit.

    Attributes:
        vectors: The ``dim`` basis kets, outcome ``s`` is ``vectors[s]``
        label: Human-readable description used in logs and reports
        metadata: How an adaptive basis was built (step, angles, signs)
    """

    vectors: tuple[CVector, ...]
    label: str = "basis"
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        vectors = tuple(fix_phase(v) for v in self.vectors)
        dim = len(vectors)
        if not 2 <= dim <= MAX_PHYSICAL_DIM:
            raise DimensionError(f"basis size {dim} outside 2..{MAX_PHYSICAL_DIM}")
        if any(v.shape != (dim,) for v in vectors):
            raise DimensionError(f"every basis vector must have dimension {dim}")
        gram = self._gram(vectors)
        if np.linalg.norm(gram - np.eye(dim), 2) > ORTHONORMAL_TOL:
            raise ValueError(f"{self.label}: vectors are not orthonormal")
        for vec in vectors:
            vec.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)

    @staticmethod
    def _gram(vectors: Sequence[CVector]) -> CMatrix:
        stacked = np.stack(vectors)
        return stacked.conj() @ stacked.T

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def gram(self) -> CMatrix:
        return self._gram(self.vectors)

    def change_of_basis(self) -> CMatrix:
        """``U_M = sum_s |m_s><s|``; column ``s`` is the ket ``m_s``."""
        return np.stack(self.vectors, axis=1)

    def to_json(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "vectors": [vector_to_json(v) for v in self.vectors],
        }


# === Basis constructors ===

def _rotation_vectors(theta: float, phi: float, d: int) -> list[CVector]:
    alpha = np.zeros(d, dtype=np.complex128)
    beta = np.zeros(d, dtype=np.complex128)
    alpha[0], alpha[1] = np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)
    beta[0], beta[1] = np.sin(theta / 2), -np.exp(1j * phi) * np.cos(theta / 2)
    return [alpha, beta, *(basis_ket(k, d) for k in range(2, d))]


def general_basis(theta: float, phi: float, d: int) -> MeasurementBasis:
    """The measurement ``{|alpha>, |beta>, |2>, ..., |d-1>}``.

    ``|alpha> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`` and
    ``|beta> = sin(theta/2)|0> - e^{i phi} cos(theta/2)|1>``.

    Raises:
        ValueError: If theta is outside the open interval (0, pi)
    """
    if not 0 < theta < np.pi:
        raise ValueError(
            f"theta={theta} outside (0, pi); use computational_basis for theta=0"
        )
    phi = float(np.mod(phi, 2 * np.pi))
    return MeasurementBasis(
        tuple(_rotation_vectors(theta, phi, d)),
        label=f"M(theta={theta:.6g}, phi={phi:.6g})",
        metadata={"kind": "general", "theta": theta, "phi": phi},
    )


def computational_basis(d: int) -> MeasurementBasis:
    return MeasurementBasis(
        tuple(basis_ket(k, d) for k in range(d)),
        label="computational",
        metadata={"kind": "computational"},
    )


def _angle_pair(angle: float, outcome: int) -> CVector:
    # (|0> + (-1)^s e^{i angle} |1>) / sqrt(2)
    return np.array(
        [1.0, (-1) ** outcome * np.exp(1j * angle)], dtype=np.complex128
    ) / np.sqrt(2)


def cluster_adaptive_basis(
    step: int, record: RecordLike, angle: float
) -> MeasurementBasis:
    """Step ``step`` of the three-gate cluster protocol.

    Step 1 measures ``{|theta_s>}``, step 2 ``{X^{s_1}|phi_s>}`` and step 3
    ``{Z^{s_1} X^{s_2}|eta_s>}`` with ``|a_s> = (|0> + (-1)^s e^{ia}|1>)/sqrt(2)``.

    Raises:
        ValueError: If the step is beyond the protocol or the record is too short
    """
    outcomes = record_outcomes(record)
    if not 1 <= step <= 3:
        raise ValueError(f"cluster protocol has 3 steps, got step {step}")
    if len(outcomes) < step - 1:
        raise ValueError(f"step {step} needs {step - 1} prior outcomes")

    correction = np.eye(2, dtype=np.complex128)
    if step == 2:
        correction = np.linalg.matrix_power(PAULI_X, outcomes[0])
    elif step == 3:
        correction = np.linalg.matrix_power(PAULI_Z, outcomes[0]) @ (
            np.linalg.matrix_power(PAULI_X, outcomes[1])
        )
    vectors = tuple(correction @ _angle_pair(angle, s) for s in range(2))
    return MeasurementBasis(
        vectors,
        label=f"cluster step {step}",
        metadata={"kind": "cluster", "step": step, "angle": angle, "prior": outcomes},
    )


def aklt_rotation_basis(theta: float) -> MeasurementBasis:
    """``M_{theta, pi/2}`` on a qutrit, defined for every real theta."""
    return MeasurementBasis(
        tuple(_rotation_vectors(theta, np.pi / 2, 3)),
        label=f"M(theta={theta:.6g}, phi=pi/2)",
        metadata={"kind": "aklt_rotation", "theta": theta, "phi": np.pi / 2},
    )


def aklt_adaptive_basis(record: RecordLike, theta: float) -> MeasurementBasis:
    """``M_{theta, pi/2}`` while every prior outcome is 2, otherwise computational."""
    if all(s == 2 for s in record_outcomes(record)):
        return aklt_rotation_basis(theta)
    return computational_basis(3)


def tricluster_p(outcome: int) -> int:
    return int(outcome in (1, 3, 5))


def tricluster_q(outcome: int) -> int:
    return int(outcome in (2, 3, 4, 5))


def _tricluster_vector(outcome: int, sign: int, angle: float) -> CVector:
    pair, bit = divmod(outcome, 2)
    # the 4/5 pair carries the conjugated phase
    chirality = -1 if pair == 2 else 1
    vec = np.zeros(6, dtype=np.complex128)
    vec[2 * pair] = 1.0
    vec[2 * pair + 1] = (-1) ** bit * sign * np.exp(1j * chirality * angle)
    return vec / np.sqrt(2)


def tricluster_adaptive_basis(
    step: int, record: RecordLike, angle: float
) -> MeasurementBasis:
    """Step ``step`` of the three-gate tricluster protocol.

    Step 2 uses sign ``(-1)^{q(s_1)}`` and angle ``(-1)^{p(s_1)} phi``; step 3
    uses sign ``(-1)^{p(s_1)+q(s_2)}`` and angle ``(-1)^{p(s_2)} eta``.

    Raises:
        ValueError: If ``step > 3`` or the record is too short
    """
    outcomes = record_outcomes(record)
    if not 1 <= step <= 3:
        raise ValueError(f"tricluster protocol has 3 steps, got step {step}")
    if len(outcomes) < step - 1:
        raise ValueError(f"step {step} needs {step - 1} prior outcomes")

    sign, effective = 1, angle
    if step == 2:
        s1 = outcomes[0]
        sign = (-1) ** tricluster_q(s1)
        effective = (-1) ** tricluster_p(s1) * angle
    elif step == 3:
        s1, s2 = outcomes[0], outcomes[1]
        sign = (-1) ** (tricluster_p(s1) + tricluster_q(s2))
        effective = (-1) ** tricluster_p(s2) * angle
    vectors = tuple(_tricluster_vector(s, sign, effective) for s in range(6))
    return MeasurementBasis(
        vectors,
        label=f"tricluster step {step}",
        metadata={
            "kind": "tricluster",
            "step": step,
            "angle": angle,
            "sign": sign,
            "effective_angle": effective,
        },
    )
