"""Matrix-product resource states, their normalization and the built-in registry."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from corrspace.core.linalg import (
    HADAMARD,
    KET_MINUS,
    KET_PLUS,
    PAULI_X,
    PAULI_Z,
    CMatrix,
    CVector,
    basis_ket,
    dagger,
    is_unitary_up_to_constant,
    ket_bra,
    to_cmatrix,
    to_cvector,
)
from corrspace.core.measurement import MeasurementBasis
from corrspace.utils.config import (
    BUILTIN_RESOURCES,
    MAX_BOND_DIM,
    MAX_PHYSICAL_DIM,
    TP_TOL,
)
from corrspace.utils.errors import DimensionError, ResourceFormatError
from corrspace.utils.serialization import (
    dump_toml,
    load_toml_text,
    locate_line,
    matrix_from_json,
    matrix_to_json,
    vector_from_json,
    vector_to_json,
)

_RESOURCE_KEYS = {"name", "d", "D", "tensors", "L", "R"}


@dataclass(frozen=True, eq=False)
class MpsResource:
    """An open-boundary MPS ``<L|A[k_N]...A[k_1]|R>``.

    Attributes:
        name: Label used in reports
        tensors: The ``d`` bond matrices ``A[k]``, each ``D x D``
        left: Left boundary vector ``L``
        right: Right boundary vector ``R``
    """

    name: str
    tensors: tuple[CMatrix, ...]
    left: CVector
    right: CVector

    def __post_init__(self) -> None:
        tensors = tuple(
            to_cmatrix(t, f"{self.name}.A[{k}]") for k, t in enumerate(self.tensors)
        )
        d = len(tensors)
        if not 2 <= d <= MAX_PHYSICAL_DIM:
            raise DimensionError(
                f"{self.name}: physical dimension {d} outside 2..{MAX_PHYSICAL_DIM}"
            )
        shapes = {t.shape for t in tensors}
        if len(shapes) != 1:
            raise DimensionError(f"{self.name}: tensors have mixed shapes {shapes}")
        rows, cols = shapes.pop()
        if rows != cols or rows > MAX_BOND_DIM:
            raise DimensionError(
                f"{self.name}: tensors must be DxD with D <= {MAX_BOND_DIM}"
            )
        left = to_cvector(self.left, f"{self.name}.L")
        right = to_cvector(self.right, f"{self.name}.R")
        for label, vec in (("L", left), ("R", right)):
            if vec.size != rows:
                raise DimensionError(
                    f"{self.name}: boundary {label} has dimension {vec.size}, "
                    f"expected {rows}"
                )
            if not np.any(vec):
                raise DimensionError(f"{self.name}: boundary {label} must be nonzero")
        object.__setattr__(self, "tensors", tensors)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def d(self) -> int:
        return len(self.tensors)

    @property
    def bond_dim(self) -> int:
        return self.tensors[0].shape[0]

    def with_boundaries(
        self, left: ArrayLike | None = None, right: ArrayLike | None = None
    ) -> MpsResource:
        return MpsResource(
            self.name,
            self.tensors,
            self.left if left is None else np.asarray(left),
            self.right if right is None else np.asarray(right),
        )

    def measured_operator(self, vector: ArrayLike) -> CMatrix:
        """``A[m] = sum_k <m|k> A[k]``: the bra conjugates the ket coefficients."""
        m = np.asarray(vector, dtype=np.complex128)
        if m.shape != (self.d,):
            raise DimensionError(
                f"measured vector has shape {m.shape}, resource has d={self.d}"
            )
        return np.tensordot(m.conj(), np.stack(self.tensors), axes=1)


@dataclass(frozen=True)
class ResourceValidationReport:
    """Outcome of checking the proportional-unitary assumption on one basis."""

    is_prop_unitary: tuple[bool, ...]
    constants: tuple[float, ...]
    c_sum_sq: float
    overall: bool

    def to_json(self) -> dict[str, Any]:
        return {
            "elements": [
                {"is_prop_unitary": flag, "c": c}
                for flag, c in zip(self.is_prop_unitary, self.constants, strict=True)
            ],
            "c_sum_sq": self.c_sum_sq,
            "overall": self.overall,
        }


# === Built-in resources ===

def _uniform(dim: int) -> CVector:
    return np.full(dim, 1 / np.sqrt(dim), dtype=np.complex128)


def _builtin_tensors(name: str) -> list[CMatrix]:
    ket0, ket1 = basis_ket(0, 2), basis_ket(1, 2)
    if name == "cluster":
        return [ket_bra(KET_PLUS, ket0), ket_bra(KET_MINUS, ket1)]
    if name == "aklt":
        return [m / np.sqrt(3) for m in (PAULI_X, PAULI_X @ PAULI_Z, PAULI_Z)]
    if name == "aklt_modified":
        return [m / np.sqrt(3) for m in (PAULI_X, PAULI_X @ PAULI_Z, HADAMARD)]
    # tricluster, stored with the 1/sqrt(3) rescaling applied
    pairs = [
        (KET_PLUS, ket0),
        (KET_MINUS, ket1),
        (KET_MINUS, ket0),
        (KET_PLUS, ket1),
        (KET_PLUS, ket1),
        (KET_MINUS, ket0),
    ]
    return [ket_bra(ket, bra) / np.sqrt(3) for ket, bra in pairs]


def builtin(
    name: str, left: ArrayLike | None = None, right: ArrayLike | None = None
) -> MpsResource:
    """Return one of the built-in resource states.

    Args:
        name: One of ``cluster``, ``aklt``, ``aklt_modified``, ``tricluster``
        left: Optional left boundary; defaults to the uniform normalized vector
        right: Optional right boundary; defaults to the uniform normalized vector

    Returns:
        The exact MPS resource

    Raises:
        ValueError: If the name is not recognized
    """
    key = name.lower()
    if key not in BUILTIN_RESOURCES:
        raise ValueError(
            "Unknown resource: {}. Supported resources: {}".format(
                name, ", ".join(BUILTIN_RESOURCES)
            )
        )
    tensors = _builtin_tensors(key)
    dim = tensors[0].shape[0]
    return MpsResource(
        key,
        tuple(tensors),
        _uniform(dim) if left is None else np.asarray(left),
        _uniform(dim) if right is None else np.asarray(right),
    )


# === Transfer map and amplitudes ===

def transfer_map(res: MpsResource, rho: CMatrix) -> CMatrix:
    """``rho -> sum_k A[k] rho A[k]^dagger``."""
    return sum(
        (a @ rho @ dagger(a) for a in res.tensors),
        start=np.zeros_like(rho, dtype=np.complex128),
    )


def transfer_expectation(
    res: MpsResource, rho: CMatrix, n: int, left: ArrayLike | None = None
) -> float:
    """``<L| A^n(rho) |L>`` for ``n >= 0`` applications of the transfer map."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    lvec = res.left if left is None else np.asarray(left, dtype=np.complex128)
    state = np.asarray(rho, dtype=np.complex128)
    for _ in range(n):
        state = transfer_map(res, state)
    return float(np.real(np.vdot(lvec, state @ lvec)))


def norm_factor(
    res: MpsResource,
    n: int,
    left: ArrayLike | None = None,
    right: ArrayLike | None = None,
) -> float:
    """Normalization ``f_n(L, R) = <L| A^n(|R><R|) |L>``.

    Args:
        res: The resource
        n: Chain length, at least 1
        left: Boundary override for ``L``
        right: Boundary override for ``R``; an all-zero vector gives 0
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rvec = res.right if right is None else np.asarray(right, dtype=np.complex128)
    return transfer_expectation(res, np.outer(rvec, rvec.conj()), n, left)


def amplitude(res: MpsResource, outcomes: Sequence[int]) -> complex:
    """Unnormalized ``<L|A[k_N]...A[k_1]|R>``; ``outcomes[0]`` acts first."""
    vec = res.right
    for k in outcomes:
        if not 0 <= k < res.d:
            raise DimensionError(f"outcome {k} out of range for d={res.d}")
        vec = res.tensors[k] @ vec
    return complex(np.vdot(res.left, vec))


# === Validation ===

def validate_resource(
    res: MpsResource, basis: MeasurementBasis, tol: float = TP_TOL
) -> ResourceValidationReport:
    """Check that every ``A[m]`` of ``basis`` is unitary up to a constant with
    ``sum c^2 = 1``.

    Raises:
        DimensionError: If the basis dimension differs from ``res.d``
    """
    if basis.dim != res.d:
        raise DimensionError(f"basis dimension {basis.dim} != resource d={res.d}")
    flags: list[bool] = []
    constants: list[float] = []
    for vector in basis.vectors:
        operator = res.measured_operator(vector)
        decomposition = is_unitary_up_to_constant(operator, tol)
        flags.append(decomposition is not None)
        constants.append(
            decomposition[0] if decomposition else float(np.linalg.norm(operator, 2))
        )
    c_sum_sq = float(sum(c * c for c in constants))
    overall = all(flags) and abs(c_sum_sq - 1.0) < tol
    if not overall:
        logging.warning(
            "[Resource] %s fails the proportional-unitary check on basis %s",
            res.name,
            basis.label,
        )
    return ResourceValidationReport(tuple(flags), tuple(constants), c_sum_sq, overall)


# === Text format ===

def resource_to_document(res: MpsResource) -> dict[str, Any]:
    return {
        "name": res.name,
        "d": res.d,
        "D": res.bond_dim,
        "L": vector_to_json(res.left),
        "R": vector_to_json(res.right),
        "tensors": [matrix_to_json(t) for t in res.tensors],
    }


def dump_resource(res: MpsResource) -> str:
    """Serialize a resource into the TOML resource format."""
    return dump_toml(resource_to_document(res))


def _require_int(document: dict[str, Any], key: str, text: str) -> int:
    value = document[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ResourceFormatError(
            f"'{key}' must be an integer", lineno=locate_line(text, key)
        )
    return value


def load_resource(config_text: str) -> MpsResource:
    """Parse a TOML resource document.

    Args:
        config_text: TOML text with fields ``d``, ``D``, ``tensors``, ``L``, ``R``
            and an optional ``name``

    Returns:
        The structurally validated resource

    Raises:
        ResourceFormatError: On syntax errors or non-numeric entries
        DimensionError: If declared dimensions disagree with the data
    """
    document = load_toml_text(config_text)
    unknown = set(document) - _RESOURCE_KEYS
    if unknown:
        first = sorted(unknown)[0]
        raise ResourceFormatError(
            f"unknown fields: {', '.join(sorted(unknown))}",
            lineno=locate_line(config_text, first),
        )
    missing = {"d", "D", "tensors", "L", "R"} - set(document)
    if missing:
        raise ResourceFormatError(f"missing fields: {', '.join(sorted(missing))}")

    d = _require_int(document, "d", config_text)
    bond_dim = _require_int(document, "D", config_text)
    raw_tensors = document["tensors"]
    if not isinstance(raw_tensors, list):
        raise ResourceFormatError(
            "'tensors' must be a list", lineno=locate_line(config_text, "tensors")
        )
    if len(raw_tensors) != d:
        raise DimensionError(f"declared d={d} but {len(raw_tensors)} tensors given")

    try:
        tensors = [
            matrix_from_json(t, f"tensors[{k}]") for k, t in enumerate(raw_tensors)
        ]
        left = vector_from_json(document["L"], "L")
        right = vector_from_json(document["R"], "R")
    except ResourceFormatError as e:
        field_name = str(e).split("[", 1)[0].split(":", 1)[0]
        raise ResourceFormatError(
            str(e), lineno=locate_line(config_text, field_name)
        ) from e

    for k, tensor in enumerate(tensors):
        if tensor.shape != (bond_dim, bond_dim):
            raise DimensionError(
                f"tensors[{k}] has shape {tensor.shape}, declared D={bond_dim}"
            )
    name = str(document.get("name", "custom"))
    res = MpsResource(name, tuple(tensors), left, right)
    logging.info("[Resource] Loaded %s (d=%d, D=%d)", name, res.d, res.bond_dim)
    return res


def open_resource(name_or_path: str) -> MpsResource:
    """Resolve a built-in name or a path to a TOML resource file."""
    if name_or_path.lower() in BUILTIN_RESOURCES:
        return builtin(name_or_path)
    path = Path(name_or_path)
    if not path.is_file():
        raise ValueError(
            "Unknown resource: {}. Supported resources: {} or a TOML file".format(
                name_or_path, ", ".join(BUILTIN_RESOURCES)
            )
        )
    return load_resource(path.read_text(encoding="utf-8"))
