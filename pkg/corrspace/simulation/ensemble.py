"""Ensemble method: exact evolution of the whole mixture of measurement histories.

Every history (outcome record and, with an error, the error Kraus index) is
enumerated exactly. Histories are grouped into flag sectors ``(p, q)``; inside
a sector, identical operators (up to global phase) are merged into one Kraus
element with an integer multiplicity. The protocol normalization ``N`` turns
multiplicities into weights ``m / N``.
"""

from __future__ import annotations

import copy
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from corrspace.core.channels import ErrorSpec, induced_kraus
from corrspace.core.linalg import (
    CMatrix,
    KrausSet,
    dagger,
    equal_up_to_phase,
    identity,
    matmul,
    operator_norm,
    pauli_byproduct,
    proportionality_deviation,
    s_z,
)
from corrspace.core.measurement import OutcomeRecord
from corrspace.core.resource import (
    MpsResource,
    builtin,
    norm_factor,
    transfer_expectation,
)
from corrspace.protocols.aklt import AKLTRotationProtocol
from corrspace.protocols.base_protocol import MeasurementProtocol
from corrspace.protocols.cluster import ClusterProtocol
from corrspace.protocols.tricluster import TriclusterProtocol
from corrspace.simulation.combinat import count_closed, h_indicator
from corrspace.utils.config import (
    MAX_AKLT_ENUMERATION_STEPS,
    MAX_AKLT_FAST_PATH_STEPS,
    MAX_BRANCHES,
    TP_TOL,
)
from corrspace.utils.errors import CapExceededError, ScientificAssertionError
from corrspace.utils.serialization import matrix_to_json

Verdict = Literal["cptp", "non_tp_sector", "non_tp_aggregate"]
TraceOrder = Literal["forward", "reverse"]
ErrorLike = KrausSet | ErrorSpec | None


@dataclass(frozen=True, eq=False)
class Branch:
    """One measurement history.

    Attributes:
        op: Accumulated correlation-space operator (exact product)
        record: Outcomes with the byproduct flag filled in
        kraus_index: Error Kraus index ``j``, ``None`` without an error
        scale: Nominal constant ``1/sqrt(d)`` per error-free step, multiplied
    """

    op: CMatrix
    record: OutcomeRecord
    kraus_index: int | None
    scale: float

    @property
    def flag(self) -> tuple[int, int]:
        assert self.record.flag is not None
        return self.record.flag


@dataclass
class KrausGroup:
    operator: CMatrix
    multiplicity: int


@dataclass
class SectorMap:
    """Weighted Kraus family of one flag sector, in units of ``1/normalization``."""

    flag: tuple[int, int]
    family: list[KrausGroup] = field(default_factory=list)
    gram: CMatrix | None = None
    tp_deviation: CMatrix | None = None
    target_match: bool | None = None

    def add(self, operator: CMatrix, multiplicity: int) -> None:
        if multiplicity == 0:
            return
        for group in self.family:
            if equal_up_to_phase(group.operator, operator):
                group.multiplicity += multiplicity
                return
        self.family.append(KrausGroup(np.array(operator), multiplicity))

    @property
    def multiplicity_total(self) -> int:
        return sum(group.multiplicity for group in self.family)

    def finalize(self, dim: int, gram: CMatrix | None = None) -> None:
        if gram is None:
            gram = np.zeros((dim, dim), dtype=np.complex128)
            for group in self.family:
                gram += group.multiplicity * (dagger(group.operator) @ group.operator)
        self.gram = gram
        self.tp_deviation = proportionality_deviation(gram)

    def deviation_norm(self) -> float:
        assert self.tp_deviation is not None
        return operator_norm(self.tp_deviation)

    def is_proportional(self, tol: float) -> bool:
        assert self.gram is not None
        scale = max(1.0, abs(np.trace(self.gram).real) / self.gram.shape[0])
        return bool(self.deviation_norm() <= tol * scale)

    def to_json(self, tol: float) -> dict[str, Any]:
        assert self.gram is not None and self.tp_deviation is not None
        return {
            "family": [
                {"operator": matrix_to_json(g.operator), "multiplicity": g.multiplicity}
                for g in self.family
            ],
            "multiplicity_total": self.multiplicity_total,
            "gram": matrix_to_json(self.gram),
            "tp_deviation": matrix_to_json(self.tp_deviation),
            "tp_deviation_norm": self.deviation_norm(),
            "proportional_to_identity": self.is_proportional(tol),
            "target_match": self.target_match,
        }


@dataclass
class InducedMapReport:
    """Per-sector Kraus families, their TP deviations and the verdict."""

    protocol: dict[str, Any]
    resource: str
    normalization: int
    sectors: dict[tuple[int, int], SectorMap]
    aggregate_tp_deviation: CMatrix
    verdict: Verdict
    tol: float
    error: dict[str, Any] | None = None
    n_branches: int = 0
    method: str = "enumeration"

    @property
    def aggregate_deviation_norm(self) -> float:
        return operator_norm(self.aggregate_tp_deviation)

    def failing_sectors(self) -> list[tuple[int, int]]:
        return [
            f
            for f, s in sorted(self.sectors.items())
            if not s.is_proportional(self.tol)
        ]

    def to_json(self) -> dict[str, Any]:
        return {
            "protocol": self.protocol,
            "resource": self.resource,
            "error": self.error,
            "method": self.method,
            "n_branches": self.n_branches,
            "normalization": self.normalization,
            "sectors": {
                f"{p},{q}": sector.to_json(self.tol)
                for (p, q), sector in sorted(self.sectors.items())
            },
            "aggregate_tp_deviation": matrix_to_json(self.aggregate_tp_deviation),
            "aggregate_tp_deviation_norm": self.aggregate_deviation_norm,
            "failing_sectors": [f"{p},{q}" for p, q in self.failing_sectors()],
            "verdict": self.verdict,
        }


# === Helper functions (Single Responsibility) ===

def _realize_error(err: ErrorLike, protocol: MeasurementProtocol) -> KrausSet | None:
    if isinstance(err, ErrorSpec):
        return err.realize(protocol.resource.d, protocol.basis(1, ()))
    return err


def _branch_count(protocol: MeasurementProtocol, err: KrausSet | None) -> int:
    return protocol.resource.d**protocol.n_steps * (len(err) if err else 1)


def _extend(
    protocol: MeasurementProtocol,
    step: int,
    op: CMatrix,
    outcomes: tuple[int, ...],
    j: int | None,
    scale: float,
) -> Iterator[Branch]:
    if step > protocol.n_steps:
        record = OutcomeRecord(outcomes, protocol.flag(outcomes))
        yield Branch(op, record, j, scale)
        return
    basis = protocol.basis(step, outcomes)
    for s, vector in enumerate(basis.vectors):
        measured = protocol.resource.measured_operator(vector)
        yield from _extend(
            protocol,
            step + 1,
            matmul(measured, op),
            (*outcomes, s),
            j,
            scale / np.sqrt(protocol.resource.d),
        )


def iter_branches(
    protocol: MeasurementProtocol,
    err: KrausSet | None = None,
    cap: int = MAX_BRANCHES,
) -> Iterator[Branch]:
    """Depth-first generator over all histories, shared prefixes multiplied once.

    Raises:
        CapExceededError: If the number of histories exceeds ``cap``
    """
    total = _branch_count(protocol, err)
    if total > cap:
        raise CapExceededError(f"{total} branches exceed the cap of {cap}")
    res = protocol.resource
    first_basis = protocol.basis(1, ())
    if err is None:
        for s, vector in enumerate(first_basis.vectors):
            measured = res.measured_operator(vector)
            yield from _extend(protocol, 2, measured, (s,), None, 1 / np.sqrt(res.d))
        return
    family = induced_kraus(res, first_basis, err)
    for element, (j, s) in zip(family.elements, family.labels, strict=True):
        yield from _extend(protocol, 2, element, (s,), j, 1.0)


def branch_enumerate(
    res: MpsResource,
    protocol: MeasurementProtocol,
    err: ErrorLike = None,
    cap: int = MAX_BRANCHES,
) -> list[Branch]:
    """All branches of ``protocol`` on ``res`` with an optional step-1 error."""
    if protocol.resource is not res:
        protocol = _rebind(protocol, res)
    return list(iter_branches(protocol, _realize_error(err, protocol), cap))


def _fold(
    grams: dict[tuple[int, int], CMatrix],
    inner: dict[tuple[int, int], CMatrix],
    op: CMatrix,
) -> None:
    for flag, gram in inner.items():
        term = dagger(op) @ gram @ op
        grams[flag] = grams[flag] + term if flag in grams else term


def traced_sector_grams(
    protocol: MeasurementProtocol, err: KrausSet | None = None
) -> dict[tuple[int, int], CMatrix]:
    """Sector grams traced backwards, last measured qudit first.

    Starts from the identity after the last step and conjugates by each
    step operator while summing its outcomes, so the step-1 record and the
    error index are traced last. Grams are in units of ``1/normalization``,
    like the enumerated families.
    """
    res = protocol.resource
    amplify = np.sqrt(res.d)

    def trace_from(
        step: int, outcomes: tuple[int, ...]
    ) -> dict[tuple[int, int], CMatrix]:
        if step > protocol.n_steps:
            return {protocol.flag(outcomes): identity(res.bond_dim)}
        grams: dict[tuple[int, int], CMatrix] = {}
        for s, vector in enumerate(protocol.basis(step, outcomes).vectors):
            measured = amplify * res.measured_operator(vector)
            _fold(grams, trace_from(step + 1, (*outcomes, s)), measured)
        return grams

    first_basis = protocol.basis(1, ())
    later = {s: trace_from(2, (s,)) for s in range(len(first_basis.vectors))}
    grams: dict[tuple[int, int], CMatrix] = {}
    if err is None:
        for s, vector in enumerate(first_basis.vectors):
            _fold(grams, later[s], amplify * res.measured_operator(vector))
        return grams
    family = induced_kraus(res, first_basis, err)
    for element, (_, s) in zip(family.elements, family.labels, strict=True):
        _fold(grams, later[s], element)
    return grams


def _rebind(protocol: MeasurementProtocol, res: MpsResource) -> MeasurementProtocol:
    clone = copy.copy(protocol)
    MeasurementProtocol.__init__(clone, res)
    return clone


def _normalization_from_scale(scale: float) -> int:
    normalization = round(1.0 / (scale * scale))
    if abs(normalization * scale * scale - 1.0) > 1e-9:
        raise ScientificAssertionError(
            f"step constants give a non-integer normalization 1/{scale * scale:.6g}"
        )
    return normalization


def _assemble_report(
    protocol: MeasurementProtocol,
    sectors: dict[tuple[int, int], SectorMap],
    normalization: int,
    err: KrausSet | None,
    tol: float,
    n_branches: int,
    method: str,
    error_info: dict[str, Any] | None,
    grams: dict[tuple[int, int], CMatrix] | None = None,
) -> InducedMapReport:
    dim = protocol.resource.bond_dim
    aggregate = -identity(dim)
    for flag in sorted(sectors):
        sector = sectors[flag]
        if grams is None:
            sector.finalize(dim)
        else:
            zero = np.zeros((dim, dim), dtype=np.complex128)
            sector.finalize(dim, grams.get(flag, zero))
        assert sector.gram is not None
        aggregate = aggregate + sector.gram / normalization
        if err is None:
            target = protocol.target_operator(flag)
            sector.target_match = all(
                equal_up_to_phase(group.operator, target, tol)
                for group in sector.family
            )

    report = InducedMapReport(
        protocol=protocol.params(),
        resource=protocol.resource.name,
        normalization=normalization,
        sectors=sectors,
        aggregate_tp_deviation=aggregate,
        verdict="cptp",
        tol=tol,
        error=error_info,
        n_branches=n_branches,
        method=method,
    )
    if report.failing_sectors():
        report.verdict = "non_tp_sector"
    elif report.aggregate_deviation_norm > tol:
        report.verdict = "non_tp_aggregate"
    logging.info(
        "[Ensemble] %s on %s: %d branches, verdict %s",
        protocol.name,
        protocol.resource.name,
        n_branches,
        report.verdict,
    )
    return report


def _error_info(err: ErrorLike, realized: KrausSet | None) -> dict[str, Any] | None:
    if isinstance(err, ErrorSpec):
        return err.to_json()
    if realized is None:
        return None
    return {"kind": "kraus", "n_kraus": len(realized)}


# === Public API ===

def run_protocol(
    protocol: MeasurementProtocol,
    err: ErrorLike = None,
    tol: float = TP_TOL,
    trace_order: TraceOrder = "forward",
) -> InducedMapReport:
    """Enumerate every history of ``protocol`` and extract the induced map.

    Args:
        protocol: Bound protocol
        err: Optional error on site 1 (Kraus set or specification)
        tol: Tolerance of the TP verdicts
        trace_order: ``forward`` traces every history into its sector as soon
            as it is complete and builds the grams from the merged families;
            ``reverse`` takes the grams from :func:`traced_sector_grams`,
            which traces the step-1 record last

    Returns:
        The induced-map report
    """
    kraus = _realize_error(err, protocol)
    sectors = {(p, q): SectorMap((p, q)) for p in (0, 1) for q in (0, 1)}
    normalization: int | None = None
    n_branches = 0
    for branch in iter_branches(protocol, kraus):
        n_branches += 1
        if normalization is None:
            normalization = _normalization_from_scale(branch.scale)
        elif abs(normalization * branch.scale**2 - 1.0) > 1e-9:
            raise ScientificAssertionError("histories carry different step constants")
        sectors[branch.flag].add(branch.op / branch.scale, 1)
    assert normalization is not None
    grams = None
    if trace_order == "reverse":
        logging.debug("[Ensemble] Tracing %s backwards", protocol.name)
        grams = traced_sector_grams(protocol, kraus)
    return _assemble_report(
        protocol,
        sectors,
        normalization,
        kraus,
        tol,
        n_branches,
        "enumeration",
        _error_info(err, kraus),
        grams,
    )


def run_cluster(
    angles: tuple[float, float, float],
    err: ErrorLike = None,
    resource: MpsResource | None = None,
    tol: float = TP_TOL,
    trace_order: TraceOrder = "forward",
) -> InducedMapReport:
    """Three J gates on the cluster state, optional error on site 1.

    Raises:
        DimensionError: If the resource does not have d=2
    """
    protocol = ClusterProtocol(resource or builtin("cluster"), angles)
    return run_protocol(protocol, err, tol, trace_order)


def run_tricluster(
    angles: tuple[float, float, float],
    err: ErrorLike = None,
    resource: MpsResource | None = None,
    tol: float = TP_TOL,
    trace_order: TraceOrder = "forward",
) -> InducedMapReport:
    """Three J gates on the tricluster state, optional error on site 1."""
    protocol = TriclusterProtocol(resource or builtin("tricluster"), angles)
    return run_protocol(protocol, err, tol, trace_order)


def _aklt_fast_path(
    protocol: AKLTRotationProtocol, err: KrausSet | None
) -> tuple[dict[tuple[int, int], SectorMap], int]:
    theta, r = protocol.theta, protocol.r
    z = pauli_byproduct(0, 1)
    sectors = {(p, q): SectorMap((p, q)) for p in (0, 1) for q in (0, 1)}
    if err is None:
        for (p, q), sector in sectors.items():
            sector.add(
                pauli_byproduct(p, q) @ s_z(theta), count_closed("S", r, p, q)
            )
            sector.add(np.linalg.matrix_power(z, r), h_indicator(p, q, r))
        return sectors, 3**r

    family = induced_kraus(protocol.resource, protocol.basis(1, ()), err)
    for (p, q), sector in sectors.items():
        for element, (_, s1) in zip(family.elements, family.labels, strict=True):
            if s1 == 0:
                operator = pauli_byproduct(p ^ 1, q) @ element
            elif s1 == 1:
                operator = pauli_byproduct(p ^ 1, q ^ 1) @ element
            else:
                operator = pauli_byproduct(p, q ^ 1) @ s_z(theta) @ element
            sector.add(operator, count_closed("T", r, p, q, s1))
        for element, (_, s1) in zip(family.elements, family.labels, strict=True):
            if s1 == 2:
                sector.add(
                    np.linalg.matrix_power(z, r - 1) @ element, h_indicator(p, q, r)
                )
    return sectors, 3 ** (r - 1)


def _require_aklt_tensors(res: MpsResource) -> None:
    reference = builtin("aklt")
    if not all(
        np.allclose(a, b, atol=TP_TOL)
        for a, b in zip(res.tensors, reference.tensors, strict=True)
    ):
        raise ValueError("the count-based fast path needs the AKLT tensors")


def run_aklt_rotation(
    theta: float,
    r: int,
    err: ErrorLike = None,
    fast_path: bool = False,
    resource: MpsResource | None = None,
    tol: float = TP_TOL,
    trace_order: TraceOrder = "forward",
) -> InducedMapReport:
    """``S_Z(theta)`` by repeated ``M_{theta, pi/2}`` on the AKLT state.

    Without an error sector ``(p, q)`` holds ``X^p Z^q S_Z(theta)`` with
    multiplicity ``|S^r_{p,q}|`` and ``Z^r`` with multiplicity ``h(p, q, r)``
    over ``3^r``. With an error on site 1 the multiplicities are
    ``|T^{r,s_1}_{p,q}|`` over ``3^(r-1)``.

    Args:
        theta: Rotation angle
        r: Number of measured sites, at least 2
        err: Optional error on site 1
        fast_path: Build sectors from closed-form counts instead of enumerating
        resource: Defaults to the AKLT built-in
        tol: Tolerance of the TP verdicts
        trace_order: ``forward`` or ``reverse``, see :func:`run_protocol`

    Raises:
        ValueError: If ``r < 2``
        CapExceededError: If ``r`` is too large for the chosen path
    """
    if r < 2:
        raise ValueError(f"r must be at least 2, got {r}")
    limit = MAX_AKLT_FAST_PATH_STEPS if fast_path else MAX_AKLT_ENUMERATION_STEPS
    if r > limit:
        raise CapExceededError(
            f"r={r} exceeds {limit}" + ("" if fast_path else "; enable the fast path")
        )
    protocol = AKLTRotationProtocol(resource or builtin("aklt"), theta, r)
    if not fast_path:
        return run_protocol(protocol, err, tol, trace_order)

    _require_aklt_tensors(protocol.resource)
    kraus = _realize_error(err, protocol)
    sectors, normalization = _aklt_fast_path(protocol, kraus)
    return _assemble_report(
        protocol,
        sectors,
        normalization,
        kraus,
        tol,
        _branch_count(protocol, kraus),
        "fast_path",
        _error_info(err, kraus),
    )


def reports_match(a: InducedMapReport, b: InducedMapReport, tol: float = 1e-12) -> bool:
    """Same normalization, same sector grams and the same grouped multiplicities."""
    if a.normalization != b.normalization or set(a.sectors) != set(b.sectors):
        return False
    for flag, sector_a in a.sectors.items():
        sector_b = b.sectors[flag]
        assert sector_a.gram is not None and sector_b.gram is not None
        scale = max(1, sector_a.multiplicity_total)
        if np.linalg.norm(sector_a.gram - sector_b.gram, 2) > tol * scale:
            return False
        if len(sector_a.family) != len(sector_b.family):
            return False
        for group in sector_a.family:
            if not any(
                other.multiplicity == group.multiplicity
                and equal_up_to_phase(other.operator, group.operator, 1e-9)
                for other in sector_b.family
            ):
                return False
    return True


def branch_probability(
    res: MpsResource, ops: Sequence[CMatrix], n_measured: int, n_total: int
) -> float:
    """Born probability of one record after ``n_measured`` of ``n_total`` sites.

    ``<L| A^(N-r)(sum_j K_j |R><R| K_j^dagger) |L> / f_N`` where ``K_j`` are the
    unnormalized operators of the record, one per error Kraus index.
    """
    if not 1 <= n_measured <= n_total:
        raise ValueError(f"need 1 <= r <= N, got r={n_measured}, N={n_total}")
    rho = np.zeros((res.bond_dim, res.bond_dim), dtype=np.complex128)
    for k in ops:
        ket = k @ res.right
        rho += np.outer(ket, ket.conj())
    return transfer_expectation(res, rho, n_total - n_measured) / norm_factor(
        res, n_total
    )


def group_by_record(branches: Sequence[Branch]) -> dict[tuple[int, ...], list[Branch]]:
    grouped: dict[tuple[int, ...], list[Branch]] = {}
    for branch in branches:
        grouped.setdefault(branch.record.outcomes, []).append(branch)
    return grouped


def record_probabilities(
    protocol: MeasurementProtocol, err: ErrorLike, n_total: int
) -> dict[tuple[int, ...], float]:
    """Born probability of every outcome record on an ``n_total``-site chain."""
    branches = branch_enumerate(protocol.resource, protocol, err)
    return {
        outcomes: branch_probability(
            protocol.resource, [b.op for b in group], protocol.n_steps, n_total
        )
        for outcomes, group in group_by_record(branches).items()
    }


def total_probability(
    protocol: MeasurementProtocol, err: ErrorLike, n_total: int
) -> float:
    """Sum of Born probabilities over every record; 1 for a TP error."""
    return float(sum(record_probabilities(protocol, err, n_total).values()))
