"""Dense physical simulation of short chains, the ground truth for the ensemble method.

Tensors carry one axis per unmeasured site, ordered by site label, so axis 0
is the next site to be measured. Flattened amplitudes use the lowest site as
the least significant digit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray

from corrspace.core.channels import ErrorSpec
from corrspace.core.linalg import CMatrix, CVector, KrausSet, operator_norm
from corrspace.core.measurement import MeasurementBasis
from corrspace.core.resource import MpsResource, norm_factor
from corrspace.protocols.base_protocol import MeasurementProtocol
from corrspace.simulation.ensemble import (
    ErrorLike,
    branch_enumerate,
    branch_probability,
    group_by_record,
)
from corrspace.utils.config import DENSE_ORACLE_MAX_SITES, MAX_ORACLE_DIM
from corrspace.utils.errors import CapExceededError, DimensionError

CTensor = NDArray[np.complex128]


@dataclass(frozen=True, eq=False)
class PhysicalState:
    """Pure state of the unmeasured sites ``sites`` (1-based labels)."""

    d: int
    sites: tuple[int, ...]
    tensor: CTensor

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def amplitudes(self) -> CVector:
        return _flatten(self.tensor)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.tensor))

    def density(self) -> DensityState:
        return DensityState(
            self.d, self.sites, np.multiply.outer(self.tensor, self.tensor.conj())
        )


@dataclass(frozen=True, eq=False)
class DensityState:
    """Density operator with the ket axes of ``sites`` first, then the bra axes."""

    d: int
    sites: tuple[int, ...]
    tensor: CTensor

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def matrix(self) -> CMatrix:
        m = self.n_sites
        order = [*reversed(range(m)), *reversed(range(m, 2 * m))]
        return self.tensor.transpose(order).reshape(self.d**m, self.d**m)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))


WeightedStates = list[tuple[float, PhysicalState]]
MixedState = WeightedStates | DensityState
AnyState = PhysicalState | MixedState


@dataclass(frozen=True, eq=False)
class MeasurementBranch:
    """One Born-rule outcome; ``state`` is ``None`` when the outcome cannot occur."""

    outcome: int
    probability: float
    state: AnyState | None


@dataclass
class OracleReport:
    """Per-history comparison of physical and correlation-space states."""

    resource: str
    protocol: dict[str, Any]
    n_sites: int
    n_histories: int
    max_state_deviation: float
    max_probability_deviation: float
    total_probability: float
    representation: str

    @property
    def max_deviation(self) -> float:
        return max(self.max_state_deviation, self.max_probability_deviation)

    def to_json(self) -> dict[str, Any]:
        return {
            "resource": self.resource,
            "protocol": self.protocol,
            "n_sites": self.n_sites,
            "n_histories": self.n_histories,
            "representation": self.representation,
            "max_state_deviation": self.max_state_deviation,
            "max_probability_deviation": self.max_probability_deviation,
            "total_probability": self.total_probability,
            "max_deviation": self.max_deviation,
        }


# === Helper functions ===

def _flatten(tensor: CTensor) -> CVector:
    return tensor.transpose(list(reversed(range(tensor.ndim)))).reshape(-1)


def _check_cap(d: int, n: int) -> None:
    if d**n > MAX_ORACLE_DIM:
        raise CapExceededError(f"d^n = {d}^{n} exceeds the oracle cap {MAX_ORACLE_DIM}")


def _chain_tensor(res: MpsResource, right: CVector, n: int) -> CTensor:
    """``<L|A[k_n]...A[k_1]|right>`` with axis ``i`` holding ``k_{i+1}``."""
    stacked = np.stack(res.tensors)
    partial: CTensor = np.asarray(right, dtype=np.complex128)
    for _ in range(n):
        partial = np.einsum("kab,...b->...ka", stacked, partial)
    return np.einsum("...a,a->...", partial, res.left.conj())


def _axis_of(sites: tuple[int, ...], site: int) -> int:
    if site not in sites:
        raise ValueError(f"site {site} was already measured or does not exist")
    return sites.index(site)


def _apply_local(tensor: CTensor, op: CMatrix, axis: int) -> CTensor:
    return np.moveaxis(np.tensordot(op, tensor, axes=(1, axis)), 0, axis)


def _project_pure(state: PhysicalState, axis: int, vector: CVector) -> CTensor:
    return np.tensordot(vector.conj(), state.tensor, axes=(0, axis))


def _project_density(state: DensityState, axis: int, vector: CVector) -> CTensor:
    ket = np.tensordot(vector.conj(), state.tensor, axes=(0, axis))
    return np.tensordot(vector, ket, axes=(0, state.n_sites - 1 + axis))


def _remaining(sites: tuple[int, ...], site: int) -> tuple[int, ...]:
    return tuple(s for s in sites if s != site)


def _as_density(state: AnyState) -> DensityState:
    if isinstance(state, DensityState):
        return state
    if isinstance(state, PhysicalState):
        return state.density()
    first = state[0][1]
    tensor = sum(
        (w * s.density().tensor for w, s in state),
        start=np.zeros((first.d,) * (2 * first.n_sites), dtype=np.complex128),
    )
    return DensityState(first.d, first.sites, tensor)


# === Public API ===

def build_state(res: MpsResource, n: int) -> PhysicalState:
    """Normalized chain state ``<L|A[k_n]...A[k_1]|R> / sqrt(f_n)``.

    Raises:
        CapExceededError: If ``d^n`` exceeds the oracle cap
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    _check_cap(res.d, n)
    tensor = _chain_tensor(res, res.right, n) / np.sqrt(norm_factor(res, n))
    logging.debug("[Oracle] Built %s chain of %d sites", res.name, n)
    return PhysicalState(res.d, tuple(range(1, n + 1)), tensor)


def apply_error_site1(
    state: PhysicalState, err: KrausSet, dense: bool | None = None
) -> MixedState:
    """Apply ``rho -> sum_j w_j F_j rho F_j^dagger`` on site 1.

    Args:
        state: Pure state that still contains site 1
        err: The error channel
        dense: Force the density-operator (True) or weighted-list (False)
            representation; by default dense is used for several Kraus
            elements on chains of up to ``DENSE_ORACLE_MAX_SITES`` sites

    Returns:
        A weighted list of normalized pure states or a density operator
    """
    if err.dim != state.d:
        raise DimensionError(f"error dimension {err.dim} != local dimension {state.d}")
    axis = _axis_of(state.sites, 1)
    if dense is None:
        dense = len(err) > 1 and state.n_sites <= DENSE_ORACLE_MAX_SITES
    components = [
        np.sqrt(w) * _apply_local(state.tensor, f, axis)
        for w, f in zip(err.weights, err.elements, strict=True)
    ]
    if dense:
        tensor = sum(
            (np.multiply.outer(c, c.conj()) for c in components),
            start=np.zeros((state.d,) * (2 * state.n_sites), dtype=np.complex128),
        )
        return DensityState(state.d, state.sites, tensor)
    weighted: WeightedStates = []
    for component in components:
        weight = float(np.linalg.norm(component) ** 2)
        if weight > 0:
            normalized = component / np.sqrt(weight)
            weighted.append((weight, PhysicalState(state.d, state.sites, normalized)))
    return weighted


def measure_site(
    state: AnyState, site: int, basis: MeasurementBasis
) -> list[MeasurementBranch]:
    """Born-rule branches of measuring ``site`` in ``basis``; the site is removed.

    Raises:
        ValueError: If the site was already measured
        DimensionError: If the basis dimension differs from the local dimension
    """
    d = state[0][1].d if isinstance(state, list) else state.d
    sites = state[0][1].sites if isinstance(state, list) else state.sites
    if basis.dim != d:
        raise DimensionError(f"basis dimension {basis.dim} != local dimension {d}")
    axis = _axis_of(sites, site)
    rest = _remaining(sites, site)

    branches: list[MeasurementBranch] = []
    for outcome, vector in enumerate(basis.vectors):
        if isinstance(state, PhysicalState):
            projected = _project_pure(state, axis, vector)
            p = float(np.linalg.norm(projected) ** 2)
            post: AnyState | None = (
                PhysicalState(d, rest, projected / np.sqrt(p)) if p > 0 else None
            )
        elif isinstance(state, DensityState):
            rho = DensityState(d, rest, _project_density(state, axis, vector))
            p = rho.trace
            post = DensityState(d, rest, rho.tensor / p) if p > 0 else None
        else:
            parts = []
            for weight, component in state:
                projected = _project_pure(component, axis, vector)
                q = float(np.linalg.norm(projected) ** 2)
                if q > 0:
                    parts.append(
                        (weight * q, PhysicalState(d, rest, projected / np.sqrt(q)))
                    )
            p = sum(w for w, _ in parts)
            post = [(w / p, s) for w, s in parts] if p > 0 else None
        branches.append(MeasurementBranch(outcome, p, post))
    return branches


def _physical_histories(
    protocol: MeasurementProtocol, state: AnyState
) -> dict[tuple[int, ...], DensityState]:
    """Unnormalized reduced state of the unmeasured sites for every record."""
    histories: dict[tuple[int, ...], DensityState] = {}

    def walk(
        step: int, current: AnyState, weight: float, record: tuple[int, ...]
    ) -> None:
        if step > protocol.n_steps:
            rho = _as_density(current)
            histories[record] = DensityState(rho.d, rho.sites, weight * rho.tensor)
            return
        basis = protocol.basis(step, record)
        for branch in measure_site(current, step, basis):
            if branch.state is None:
                continue
            record_next = (*record, branch.outcome)
            walk(step + 1, branch.state, weight * branch.probability, record_next)

    walk(1, state, 1.0, ())
    return histories


def oracle_comparison(
    res: MpsResource,
    protocol: MeasurementProtocol,
    err: ErrorLike,
    n: int,
    dense: bool | None = None,
) -> OracleReport:
    """Compare every history of ``protocol`` on an ``n``-site chain.

    For each record the physical reduced state of sites ``r+1..n`` is compared
    with ``sum_j W(K_j|R>) W(K_j|R>)^dagger / f_n`` built from the ensemble
    branch operators ``K_j``, and the Born probability with
    ``branch_probability``.

    Raises:
        ValueError: If the chain has no site left after the protocol
        CapExceededError: If ``d^n`` exceeds the oracle cap
    """
    r = protocol.n_steps
    if n < r + 1:
        raise ValueError(f"chain of {n} sites needs at least {r + 1} for this protocol")
    state: AnyState = build_state(res, n)
    kraus = err
    if isinstance(err, ErrorSpec):
        kraus = err.realize(res.d, protocol.basis(1, ()))
    branches = branch_enumerate(res, protocol, kraus)
    representation = "pure"
    if kraus is not None:
        state = apply_error_site1(state, kraus, dense)
        representation = "dense" if isinstance(state, DensityState) else "weighted"

    physical = _physical_histories(protocol, state)
    f_n = norm_factor(res, n)
    state_deviation = 0.0
    probability_deviation = 0.0
    total = 0.0
    grouped = group_by_record(branches)
    for record, group in grouped.items():
        dim = res.d ** (n - r)
        predicted = np.zeros((dim, dim), dtype=np.complex128)
        for branch in group:
            w = _flatten(_chain_tensor(res, branch.op @ res.right, n - r))
            predicted += np.outer(w, w.conj())
        predicted /= f_n
        observed = (
            physical[record].matrix
            if record in physical
            else np.zeros((dim, dim), dtype=np.complex128)
        )
        state_deviation = max(state_deviation, operator_norm(observed - predicted))
        probability = branch_probability(res, [b.op for b in group], r, n)
        total += probability
        observed_p = float(np.real(np.trace(observed)))
        probability_deviation = max(
            probability_deviation, abs(observed_p - probability)
        )

    report = OracleReport(
        resource=res.name,
        protocol=protocol.params(),
        n_sites=n,
        n_histories=len(grouped),
        max_state_deviation=state_deviation,
        max_probability_deviation=probability_deviation,
        total_probability=total,
        representation=representation,
    )
    logging.info(
        "[Oracle] %s on %s, n=%d: max deviation %.3e over %d histories",
        protocol.name,
        res.name,
        n,
        report.max_deviation,
        report.n_histories,
    )
    return report


def compare_with_correlation(
    res: MpsResource, protocol: MeasurementProtocol, err: ErrorLike, n: int
) -> float:
    """Largest deviation between the physical chain and the correlation prediction."""
    return oracle_comparison(res, protocol, err, n).max_deviation

