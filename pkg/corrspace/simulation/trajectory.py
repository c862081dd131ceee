"""Trajectory method: follow one outcome and test the operator it implements.

A single branch implements ``K = sum_k A[k] <m_s|F|k>`` on the correlation
space. When ``K^dagger K`` is not proportional to the identity, the branch
can only be normalized by a state-dependent factor, which is not linear.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from corrspace.core.channels import ErrorSpec
from corrspace.core.linalg import (
    CMatrix,
    CVector,
    KrausSet,
    TpVerdict,
    dagger,
    is_proportional_to_unitary_and_tp,
    operator_norm,
    proportionality_deviation,
    to_cvector,
)
from corrspace.core.measurement import MeasurementBasis, general_basis
from corrspace.core.resource import MpsResource
from corrspace.utils.config import PHASE_CONSTRAINT_TOL, TP_TOL
from corrspace.utils.errors import DimensionError
from corrspace.utils.serialization import (
    complex_to_json,
    matrix_to_json,
    vector_to_json,
)


@dataclass(frozen=True, eq=False)
class TrajectoryResult:
    """Operator of one outcome branch, before and after normalization."""

    operator: CMatrix
    outcome: int
    norm: float
    normalized: CMatrix
    verdict: TpVerdict

    @property
    def tp_residual(self) -> float:
        gram = dagger(self.normalized) @ self.normalized
        return operator_norm(proportionality_deviation(gram))

    def to_json(self) -> dict[str, Any]:
        return {
            "outcome": self.outcome,
            "operator": matrix_to_json(self.operator),
            "norm": self.norm,
            "normalized": matrix_to_json(self.normalized),
            "tp_residual": self.tp_residual,
            "verdict": self.verdict,
        }


@dataclass(frozen=True, eq=False)
class TheoremWitness:
    """A unitary single-qudit error whose outcome branch is not TP.

    Attributes:
        error: The error as a declarative specification
        construction: 1 for ``U_{1<->2}``, 2 for ``U_{0<->2} V^s``,
            3 for ``U_{0<->1} U_{0<->2} V^t``
        outcome: Index of the measured basis vector
        operator: The non-TP correlation-space operator
        constraint_data: Phase constraint evaluations for every ``(s, t)``
    """

    error: ErrorSpec
    construction: int
    outcome: int
    operator: CMatrix
    constraint_data: list[dict[str, Any]] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "error": self.error.to_json(),
            "construction": self.construction,
            "outcome": self.outcome,
            "operator": matrix_to_json(self.operator),
            "constraint_data": self.constraint_data,
        }


@dataclass(frozen=True, eq=False)
class RescueReport:
    """State-dependent renormalization of a branch operator over probe states."""

    trajectory: TrajectoryResult
    probe_norms: tuple[float, ...]
    renormalized: tuple[CVector | None, ...]
    proportional: bool
    nonlinear: bool
    additivity_residual: float | None

    def to_json(self) -> dict[str, Any]:
        return {
            "trajectory": self.trajectory.to_json(),
            "probe_norms": list(self.probe_norms),
            "renormalized": [
                None if v is None else vector_to_json(v) for v in self.renormalized
            ],
            "proportional_to_unitary": self.proportional,
            "nonlinear": self.nonlinear,
            "additivity_residual": self.additivity_residual,
        }


def trajectory_step(
    res: MpsResource,
    basis: MeasurementBasis,
    err: KrausSet | None,
    outcome: int,
) -> TrajectoryResult:
    """Operator implemented when site 1 suffers ``err`` and yields ``outcome``.

    Args:
        res: The resource
        basis: Measurement basis of site 1
        err: A single unitary Kraus element with weight 1, or ``None``
        outcome: Index into ``basis.vectors``

    Returns:
        The raw operator, its norm, the normalized copy and the TP verdict

    Raises:
        DimensionError: If the outcome is out of range or dimensions differ
        ValueError: If ``err`` has more than one element
    """
    if basis.dim != res.d:
        raise DimensionError(f"basis dimension {basis.dim} != resource d={res.d}")
    if not 0 <= outcome < basis.dim:
        raise DimensionError(f"outcome {outcome} out of range for d={basis.dim}")
    vector = basis.vectors[outcome]
    if err is not None:
        if len(err) != 1:
            raise ValueError(f"trajectory needs a single-Kraus error, got {len(err)}")
        if err.dim != res.d:
            raise DimensionError(f"error dimension {err.dim} != resource d={res.d}")
        vector = dagger(err.elements[0]) @ vector
    operator = res.measured_operator(vector)
    norm = operator_norm(operator)
    normalized = operator / norm if norm > 0 else operator
    return TrajectoryResult(
        operator=operator,
        outcome=outcome,
        norm=norm,
        normalized=normalized,
        verdict=is_proportional_to_unitary_and_tp(operator),
    )


def phase_constraint(d: int, phi: float, s: int, t: int) -> tuple[float, bool]:
    """``2 phi + (t - s) omega`` reduced mod pi, with ``omega = 2 pi / d``.

    Returns:
        The residue and whether it lies within tolerance of 0 or pi
    """
    if d < 2:
        raise ValueError(f"d must be at least 2, got {d}")
    omega = 2 * np.pi / d
    value = float(np.mod(2 * phi + (t - s) * omega, np.pi))
    satisfied = value < PHASE_CONSTRAINT_TOL or value > np.pi - PHASE_CONSTRAINT_TOL
    return value, satisfied


# === Theorem scan ===

def _exchange(a: int, b: int) -> ErrorSpec:
    return ErrorSpec("exchange", {"a": a, "b": b})


def _phase(s: int) -> ErrorSpec:
    return ErrorSpec("phase_power", {"s": s})


def _candidates(d: int) -> list[tuple[int, ErrorSpec, int]]:
    # (construction, error, outcome); outcome 0 is |alpha>
    candidates = [(1, _exchange(1, 2), 2)]
    candidates += [
        (2, ErrorSpec("composed", parts=(_exchange(0, 2), _phase(s))), 0)
        for s in range(d)
    ]
    candidates += [
        (
            3,
            ErrorSpec(
                "composed", parts=(_exchange(0, 1), _exchange(0, 2), _phase(t))
            ),
            0,
        )
        for t in range(d)
    ]
    return candidates


def _mean_square(operator: CMatrix) -> float:
    return float(np.real(np.trace(dagger(operator) @ operator))) / operator.shape[0]


def _constraint_table(d: int, phi: float) -> list[dict[str, Any]]:
    table = []
    for s in range(d):
        for t in range(d):
            value, satisfied = phase_constraint(d, phi, s, t)
            table.append({"s": s, "t": t, "value": value, "satisfied": satisfied})
    return table


def _proof_scalars(
    res: MpsResource,
    basis: MeasurementBasis,
    theta: float,
    phi: float,
    candidates: list[tuple[int, TrajectoryResult]],
) -> dict[str, Any]:
    d = res.d
    omega = 2 * np.pi / d
    cos2, sin2 = np.cos(theta / 2) ** 2, np.sin(theta / 2) ** 2
    eta = _mean_square(res.tensors[1])
    xi = _mean_square(res.tensors[2])
    gammas = [_mean_square(r.operator) for c, r in candidates if c == 2]
    deltas = [_mean_square(r.operator) for c, r in candidates if c == 3]
    gamma_p = [(2 / np.sin(theta)) * (g - xi * cos2 - eta * sin2) for g in gammas]
    delta_p = [(2 / np.sin(theta)) * (g - xi * sin2 - eta * cos2) for g in deltas]

    pairs = []
    for s in range(d):
        for t in range(d):
            epsilon = np.exp(-1j * (phi - s * omega)) * gamma_p[s] - np.exp(
                1j * (phi + t * omega)
            ) * delta_p[t]
            denominator = np.exp(-2j * (phi - s * omega)) - np.exp(
                2j * (phi + t * omega)
            )
            epsilon_p = None if abs(denominator) < TP_TOL else epsilon / denominator
            pairs.append(
                {
                    "s": s,
                    "t": t,
                    "epsilon": complex_to_json(epsilon),
                    "epsilon_prime": None
                    if epsilon_p is None
                    else complex_to_json(epsilon_p),
                }
            )
    return {
        "basis": basis.to_json(),
        "eta": eta,
        "xi": xi,
        "gamma": gammas,
        "gamma_prime": gamma_p,
        "delta": deltas,
        "delta_prime": delta_p,
        "epsilon": pairs,
        "candidates": [
            {"construction": c, **r.to_json()} for c, r in candidates
        ],
    }


def theorem_scan(
    res: MpsResource,
    theta: float,
    phi: float,
    diagnostics: dict[str, Any] | None = None,
) -> TheoremWitness | None:
    """Search the three unitary-error constructions for a non-TP branch.

    The constructions are tried in order: ``U_{1<->2}`` with outcome ``|2>``,
    then ``U_{0<->2} V^s`` and ``U_{0<->1} U_{0<->2} V^t`` with outcome
    ``|alpha>`` for every ``s`` and ``t``. The first non-TP branch is returned.

    Args:
        res: The resource
        theta: Polar angle of the measurement, in ``(0, pi)``
        phi: Azimuthal angle of the measurement
        diagnostics: If given, filled with the constraint table, every
            candidate operator and the intermediate scalars of the argument

    Returns:
        The first witness, or ``None`` when every construction is TP or
        ``d < 3`` leaves no level ``|2>`` to build them on
    """
    d = res.d
    constraint_data = _constraint_table(d, phi)
    if diagnostics is not None:
        diagnostics["constraints"] = constraint_data
    if d < 3:
        logging.info("[Trajectory] %s has d=%d; no construction applies", res.name, d)
        if diagnostics is not None:
            diagnostics["reason"] = "constructions need the level |2>"
        return None

    basis = general_basis(theta, phi, d)
    evaluated: list[tuple[int, TrajectoryResult]] = []
    witness: TheoremWitness | None = None
    for construction, spec, outcome in _candidates(d):
        result = trajectory_step(res, basis, spec.realize(d, basis), outcome)
        evaluated.append((construction, result))
        if witness is None and result.verdict == "non_tp":
            witness = TheoremWitness(
                spec, construction, outcome, result.operator, constraint_data
            )
            logging.info(
                "[Trajectory] Witness on %s: construction %d, error %s",
                res.name,
                construction,
                spec.to_json(),
            )
            if diagnostics is None:
                break

    if diagnostics is not None:
        diagnostics.update(_proof_scalars(res, basis, theta, phi, evaluated))
    if witness is None:
        logging.warning(
            "[Trajectory] No witness on %s at theta=%g, phi=%g", res.name, theta, phi
        )
    return witness


# === Non-TP rescue ===

def _projective_distance(a: CVector, b: CVector) -> float:
    return float(1.0 - abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))


def nontp_rescue_check(
    res: MpsResource,
    basis: MeasurementBasis,
    err: KrausSet | None,
    outcome: int,
    probe_states: Sequence[ArrayLike],
    tol: float = TP_TOL,
) -> RescueReport:
    """Renormalize one branch by ``||K|R>||`` for each probe ``|R>``.

    The first two probes are also superposed: for a TP branch the renormalized
    image of ``|R_1> + |R_2>`` is parallel to the sum of the renormalized
    images, otherwise the renormalization breaks additivity.

    Raises:
        DimensionError: If a probe is zero or has the wrong dimension
    """
    step = trajectory_step(res, basis, err, outcome)
    operator = step.operator
    probes: list[CVector] = []
    for i, raw in enumerate(probe_states):
        probe = to_cvector(raw, f"probe[{i}]")
        if probe.size != res.bond_dim:
            raise DimensionError(
                f"probe[{i}] has dimension {probe.size}, expected {res.bond_dim}"
            )
        norm = np.linalg.norm(probe)
        if norm == 0:
            raise DimensionError(f"probe[{i}] is zero")
        probes.append(probe / norm)

    images = [operator @ probe for probe in probes]
    norms = tuple(float(np.linalg.norm(image)) for image in images)
    renormalized = tuple(
        image / n if n > tol else None for image, n in zip(images, norms, strict=True)
    )

    additivity: float | None = None
    if len(probes) >= 2 and renormalized[0] is not None and renormalized[1] is not None:
        combined = operator @ (probes[0] + probes[1])
        summed = renormalized[0] + renormalized[1]
        if np.linalg.norm(combined) > tol and np.linalg.norm(summed) > tol:
            additivity = _projective_distance(combined, summed)

    return RescueReport(
        trajectory=step,
        probe_norms=norms,
        renormalized=renormalized,
        proportional=step.verdict == "tp",
        nonlinear=bool(len(norms) > 1 and np.var(norms) > tol),
        additivity_residual=additivity,
    )
