"""Physical single-qudit error models and the induced correlation-space Kraus family."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.linalg

from corrspace.core.linalg import (
    KET_MINUS,
    KET_PLUS,
    CMatrix,
    KrausSet,
    basis_ket,
    identity,
    ket_bra,
    tp_deviation,
)
from corrspace.core.measurement import MeasurementBasis
from corrspace.core.resource import MpsResource
from corrspace.utils.config import (
    RANDOM_KRAUS_MAX_ROWS,
    TP_TOL,
    UNITARY_EXACT_TOL,
)
from corrspace.utils.errors import (
    CapExceededError,
    DimensionError,
    ResourceFormatError,
    ScientificAssertionError,
    TPViolationError,
)
from corrspace.utils.serialization import (
    load_toml_text,
    locate_line,
    matrix_from_json,
)


def validate_channel(kraus: KrausSet, tol: float = TP_TOL) -> KrausSet:
    """Reject channels that are not trace preserving or carry negative weights.

    Raises:
        TPViolationError: If ``sum_j w_j F_j^dagger F_j != I`` within ``tol``
    """
    if not kraus.has_nonnegative_weights:
        raise TPViolationError("physical channels need nonnegative weights")
    residual = float(np.linalg.norm(tp_deviation(kraus), 2))
    if residual > tol:
        raise TPViolationError(
            f"channel is not trace preserving (residual {residual:.3e})"
        )
    return kraus


def _unitary_channel(matrix: CMatrix) -> KrausSet:
    return validate_channel(KrausSet((matrix,)), UNITARY_EXACT_TOL)


def exchange_matrix(a: int, b: int, d: int) -> CMatrix:
    """``U_{a<->b} = |a><b| + |b><a| + I - |a><a| - |b><b|``."""
    if a == b or not (0 <= a < d and 0 <= b < d):
        raise DimensionError(f"exchange needs distinct indices below {d}, got {a}, {b}")
    ket_a, ket_b = basis_ket(a, d), basis_ket(b, d)
    return (
        ket_bra(ket_a, ket_b)
        + ket_bra(ket_b, ket_a)
        + identity(d)
        - ket_bra(ket_a, ket_a)
        - ket_bra(ket_b, ket_b)
    )


def phase_matrix(s: int, d: int) -> CMatrix:
    """``V^s`` with ``V = sum_p exp(-i omega p)|p><p|`` and ``omega = 2 pi / d``."""
    if d < 2:
        raise DimensionError(f"phase error needs d >= 2, got {d}")
    omega = 2 * np.pi / d
    # reduce the exponent so that V^d is exactly I
    powers = (np.arange(d) * s) % d
    return np.diag(np.exp(-1j * omega * powers)).astype(np.complex128)


def exchange_error(a: int, b: int, d: int) -> KrausSet:
    return _unitary_channel(exchange_matrix(a, b, d))


def phase_error(s: int, d: int) -> KrausSet:
    return _unitary_channel(phase_matrix(s, d))


def paper_error_aklt(basis: MeasurementBasis) -> KrausSet:
    """The qutrit error ``F_1 = U_M (|+><0| - |-><1| + |2><2|)``.

    ``U_M = |alpha><0| + |beta><1| + |2><2|`` is read off the basis, so the
    induced family is ``sqrt(2/3)|0><1|``, ``sqrt(2/3)|1><0|`` and ``Z/sqrt(3)``
    on the AKLT state for every ``theta``.

    Raises:
        DimensionError: If the basis is not a qutrit basis
    """
    if basis.dim != 3:
        raise DimensionError(
            f"paper AKLT error needs a qutrit basis, got d={basis.dim}"
        )
    plus = np.append(KET_PLUS, 0.0)
    minus = np.append(KET_MINUS, 0.0)
    ket0, ket1, ket2 = (basis_ket(k, 3) for k in range(3))
    flip = ket_bra(plus, ket0) - ket_bra(minus, ket1) + ket_bra(ket2, ket2)
    return _unitary_channel(basis.change_of_basis() @ flip)


def paper_error_aklt_v2() -> KrausSet:
    """The Hermitian qutrit unitary that turns outcome 2 into ``|1><0|``."""
    ket0, ket1, ket2 = (basis_ket(k, 3) for k in range(3))
    sym = (ket0 + ket1) / np.sqrt(2)
    anti = (ket0 - ket1) / np.sqrt(2)
    unitary = ket_bra(ket2, sym) + ket_bra(sym, ket2) + ket_bra(anti, anti)
    return _unitary_channel(unitary)


def weyl_operators(d: int) -> list[CMatrix]:
    """Clock-and-shift operators ``X^a Z^b`` in lexicographic ``(a, b)`` order."""
    shift = np.roll(identity(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return [
        np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
        for a, b in itertools.product(range(d), repeat=2)
    ]


def depolarizing_error(p: float, d: int) -> KrausSet:
    """Generalized depolarizing channel built from the ``d^2`` Weyl operators.

    Raises:
        ValueError: If ``p`` is outside ``[0, d^2 / (d^2 - 1)]``
    """
    p_max = d * d / (d * d - 1)
    if not 0.0 <= p <= p_max:
        raise ValueError(f"depolarizing probability {p} outside [0, {p_max:.6g}]")
    operators = weyl_operators(d)
    weights = [1.0 - p * (d * d - 1) / (d * d)] + [p / (d * d)] * (d * d - 1)
    elements = tuple(np.sqrt(w) * op for w, op in zip(weights, operators, strict=True))
    return validate_channel(KrausSet(elements))


def random_cptp(d: int, n_kraus: int, seed: int | None) -> KrausSet:
    """Kraus set cut from a Gaussian isometry orthonormalized by QR.

    The QR phases are fixed so that ``n_kraus=1`` samples a Haar unitary.

    Raises:
        CapExceededError: If ``n_kraus * d`` exceeds the row cap
    """
    if n_kraus < 1:
        raise ValueError(f"n_kraus must be positive, got {n_kraus}")
    rows = n_kraus * d
    if rows > RANDOM_KRAUS_MAX_ROWS:
        raise CapExceededError(f"n_kraus*d={rows} exceeds {RANDOM_KRAUS_MAX_ROWS}")
    rng = np.random.default_rng(seed)
    gaussian = rng.normal(size=(rows, d)) + 1j * rng.normal(size=(rows, d))
    q, r = scipy.linalg.qr(gaussian, mode="economic")
    diagonal = np.diag(r)
    q = q * (diagonal / np.abs(diagonal))
    blocks = tuple(q[j * d : (j + 1) * d, :] for j in range(n_kraus))
    return validate_channel(KrausSet(blocks))


def compose(*channels: KrausSet) -> KrausSet:
    """Sequential composition; the rightmost channel acts first."""
    if not channels:
        raise ValueError("compose needs at least one channel")
    result = channels[-1]
    for outer in reversed(channels[:-1]):
        if outer.dim != result.dim:
            raise DimensionError("composed channels must share a dimension")
        result = KrausSet(
            tuple(a @ b for a in outer.elements for b in result.elements),
            tuple(wa * wb for wa in outer.weights for wb in result.weights),
        )
    return validate_channel(result)


def induced_kraus(
    res: MpsResource,
    basis: MeasurementBasis,
    err: KrausSet,
    tol: float = TP_TOL,
) -> KrausSet:
    """Correlation-space family ``E_{j,s} = sum_k A[k] <m_s|F_j|k>``.

    Elements are ordered with ``j`` outer and ``s`` inner and labelled ``(j, s)``.

    Raises:
        DimensionError: If the dimensions of resource, basis and error differ
        TPViolationError: If ``err`` is not trace preserving
        ScientificAssertionError: If the family fails ``sum E^dagger E = I``
    """
    if not err.dim == res.d == basis.dim:
        raise DimensionError(
            f"dimension mismatch: error {err.dim}, resource {res.d}, basis {basis.dim}"
        )
    validate_channel(err, tol)
    elements: list[CMatrix] = []
    labels: list[tuple[int, int]] = []
    for j, (weight, f_j) in enumerate(zip(err.weights, err.elements, strict=True)):
        for s, m_s in enumerate(basis.vectors):
            # A[F_j^dagger m_s] = sum_k <m_s|F_j|k> A[k]
            elements.append(np.sqrt(weight) * res.measured_operator(f_j.conj().T @ m_s))
            labels.append((j, s))
    family = KrausSet(tuple(elements), labels=tuple(labels))
    residual = float(np.linalg.norm(tp_deviation(family), 2))
    if residual > tol:
        raise ScientificAssertionError(
            f"induced family on {res.name} is not TP (residual {residual:.3e})"
        )
    logging.debug("[Channels] %d induced Kraus operators on %s", len(family), res.name)
    return family


# === Error specifications ===

@dataclass(frozen=True)
class ErrorSpec:
    """A declarative error description realized against a dimension and basis.

    Attributes:
        kind: ``identity``, ``exchange``, ``phase_power``, ``custom_kraus``,
            ``composed``, ``depolarizing``, ``random``, ``paper_aklt`` or
            ``paper_aklt_v2``
        params: Parameters per kind
        parts: Sub-specifications of a ``composed`` error, outermost first
    """

    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    parts: tuple[ErrorSpec, ...] = ()

    def realize(self, d: int, basis: MeasurementBasis | None = None) -> KrausSet:
        """Build the Kraus set for physical dimension ``d``.

        Raises:
            ValueError: If the kind is unknown or parameters are missing
        """
        builder = _ERROR_BUILDERS.get(self.kind)
        if builder is None:
            raise ValueError(
                "Unsupported error kind: {}. Supported kinds: {}".format(
                    self.kind, ", ".join(_ERROR_BUILDERS)
                )
            )
        try:
            return builder(self, d, basis)
        except KeyError as e:
            raise ValueError(f"error kind {self.kind} is missing parameter {e}") from e

    def to_json(self) -> dict[str, Any]:
        document: dict[str, Any] = {"kind": self.kind, **self.params}
        if self.kind == "custom_kraus":
            document["kraus"] = f"{len(self.params['kraus'])} matrices"
        if self.parts:
            document["parts"] = [part.to_json() for part in self.parts]
        return document


def _build_identity(
    spec: ErrorSpec, d: int, basis: MeasurementBasis | None
) -> KrausSet:
    return _unitary_channel(identity(d))


def _build_exchange(
    spec: ErrorSpec, d: int, basis: MeasurementBasis | None
) -> KrausSet:
    return exchange_error(int(spec.params["a"]), int(spec.params["b"]), d)


def _build_phase(spec: ErrorSpec, d: int, basis: MeasurementBasis | None) -> KrausSet:
    return phase_error(int(spec.params["s"]), d)


def _build_custom(spec: ErrorSpec, d: int, basis: MeasurementBasis | None) -> KrausSet:
    kraus = KrausSet(tuple(np.asarray(m) for m in spec.params["kraus"]))
    if kraus.dim != d:
        raise DimensionError(f"custom Kraus dimension {kraus.dim} != d={d}")
    return validate_channel(kraus)


def _build_composed(
    spec: ErrorSpec, d: int, basis: MeasurementBasis | None
) -> KrausSet:
    return compose(*(part.realize(d, basis) for part in spec.parts))


def _build_depolarizing(
    spec: ErrorSpec, d: int, basis: MeasurementBasis | None
) -> KrausSet:
    return depolarizing_error(float(spec.params["p"]), d)


def _build_random(spec: ErrorSpec, d: int, basis: MeasurementBasis | None) -> KrausSet:
    return random_cptp(d, int(spec.params["n_kraus"]), spec.params.get("seed"))


def _build_paper_aklt(
    spec: ErrorSpec, d: int, basis: MeasurementBasis | None
) -> KrausSet:
    if basis is None:
        raise ValueError("paper_aklt needs the step-1 measurement basis")
    return paper_error_aklt(basis)


def _build_paper_aklt_v2(
    spec: ErrorSpec, d: int, basis: MeasurementBasis | None
) -> KrausSet:
    if d != 3:
        raise DimensionError(f"paper_aklt_v2 is a qutrit error, got d={d}")
    return paper_error_aklt_v2()


_ERROR_BUILDERS = {
    "identity": _build_identity,
    "exchange": _build_exchange,
    "phase_power": _build_phase,
    "custom_kraus": _build_custom,
    "composed": _build_composed,
    "depolarizing": _build_depolarizing,
    "random": _build_random,
    "paper_aklt": _build_paper_aklt,
    "paper_aklt_v2": _build_paper_aklt_v2,
}


def error_spec_from_document(document: dict[str, Any], text: str = "") -> ErrorSpec:
    """Build an ErrorSpec from a parsed ``[error]`` table.

    Raises:
        ResourceFormatError: If the kind is missing or unknown
    """
    kind = document.get("kind")
    if kind not in _ERROR_BUILDERS:
        raise ResourceFormatError(
            f"unknown or missing error kind {kind!r}", lineno=locate_line(text, "kind")
        )
    params = {k: v for k, v in document.items() if k not in ("kind", "parts")}
    if kind == "custom_kraus":
        params["kraus"] = [
            matrix_from_json(m, f"kraus[{i}]")
            for i, m in enumerate(params.get("kraus", []))
        ]
    parts = tuple(
        error_spec_from_document(part, text) for part in document.get("parts", [])
    )
    return ErrorSpec(kind, params, parts)


def load_error_spec(text: str) -> ErrorSpec:
    """Parse a TOML error specification (an ``[error]`` table)."""
    document = load_toml_text(text)
    if "error" not in document:
        raise ResourceFormatError("missing [error] table")
    return error_spec_from_document(document["error"], text)


def load_kraus_file(text: str) -> KrausSet:
    """Parse a TOML Kraus file with ``kraus = [...]`` and optional ``weights``.

    The family is not validated as a channel, so it can be checked as given.
    """
    document = load_toml_text(text)
    raw = document.get("kraus")
    if not isinstance(raw, list) or not raw:
        raise ResourceFormatError(
            "'kraus' must be a non-empty list of matrices",
            lineno=locate_line(text, "kraus"),
        )
    try:
        matrices = [matrix_from_json(m, f"kraus[{i}]") for i, m in enumerate(raw)]
    except ResourceFormatError as e:
        raise ResourceFormatError(str(e), lineno=locate_line(text, "kraus")) from e
    weights: Sequence[float] = document.get("weights", ())
    return KrausSet(tuple(matrices), tuple(float(w) for w in weights))
