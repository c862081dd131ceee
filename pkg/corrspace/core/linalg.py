"""
Dense complex linear algebra on small matrices.

Every operator of the simulator (MPS tensors, Pauli byproducts, measured-basis
operators, Kraus elements) is a complex128 numpy array of dimension at most
``MAX_MATRIX_DIM``. This module holds the validators, the gate constructors and
the trace-preservation / complete-positivity checks shared by the other modules.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from corrspace.utils.config import HERMITIAN_TOL, MAX_MATRIX_DIM, TP_TOL
from corrspace.utils.errors import DimensionError

CMatrix = NDArray[np.complex128]
CVector = NDArray[np.complex128]
TpVerdict = Literal["tp", "non_tp"]


def to_cmatrix(value: ArrayLike, name: str = "matrix") -> CMatrix:
    """
    Convert ``value`` into a finite complex128 matrix within the size cap.

    Parameters
    ----------
    value : ArrayLike
        Anything numpy can turn into a two-dimensional array.
    name : str
        Label used in error messages.

    Returns
    -------
    CMatrix
        A fresh, read-only complex128 array.

    Raises
    ------
    DimensionError
        If the array is not two-dimensional, is empty, exceeds the cap or
        contains non-finite entries.
    """
    matrix = np.array(value, dtype=np.complex128)
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise DimensionError(
            f"{name}: expected a non-empty 2D array, got {matrix.shape}"
        )
    if max(matrix.shape) > MAX_MATRIX_DIM:
        raise DimensionError(
            f"{name}: shape {matrix.shape} exceeds the "
            f"{MAX_MATRIX_DIM}x{MAX_MATRIX_DIM} cap"
        )
    if not np.all(np.isfinite(matrix)):
        raise DimensionError(f"{name}: entries must be finite")
    matrix.setflags(write=False)
    return matrix


def to_cvector(value: ArrayLike, name: str = "vector") -> CVector:
    """Convert ``value`` into a finite complex128 vector within the size cap."""
    vector = np.array(value, dtype=np.complex128)
    if vector.ndim != 1 or vector.size == 0:
        raise DimensionError(
            f"{name}: expected a non-empty 1D array, got {vector.shape}"
        )
    if vector.size > MAX_MATRIX_DIM:
        raise DimensionError(
            f"{name}: dimension {vector.size} exceeds {MAX_MATRIX_DIM}"
        )
    if not np.all(np.isfinite(vector)):
        raise DimensionError(f"{name}: entries must be finite")
    vector.setflags(write=False)
    return vector


def is_square(matrix: CMatrix) -> bool:
    return matrix.ndim == 2 and matrix.shape[0] == matrix.shape[1]


def _require_square(matrix: CMatrix, name: str) -> None:
    if not is_square(matrix):
        raise DimensionError(f"{name}: expected a square matrix, got {matrix.shape}")


def dagger(matrix: CMatrix) -> CMatrix:
    return matrix.conj().T


def matmul(a: CMatrix, b: CMatrix) -> CMatrix:
    """
    Complex matrix product ``a @ b``.

    Raises
    ------
    DimensionError
        If ``a.cols != b.rows``.
    """
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def operator_norm(matrix: CMatrix) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(matrix, 2))


def equal_up_to_phase(a: CMatrix, b: CMatrix, tol: float = TP_TOL) -> bool:
    """True iff ``a = e^{i phi} b`` for some real phi, within ``tol``."""
    if a.shape != b.shape:
        return False
    overlap = np.vdot(b, a)
    if abs(overlap) <= tol:
        return operator_norm(a) <= tol and operator_norm(b) <= tol
    phase = overlap / abs(overlap)
    return bool(np.linalg.norm(a - phase * b) <= tol * max(1.0, np.linalg.norm(a)))


def is_unitary_up_to_constant(
    m: CMatrix, tol: float = TP_TOL
) -> tuple[float, CMatrix] | None:
    """
    Decompose ``m = c U`` with ``U`` unitary and ``c > 0``.

    ``c`` is the operator norm of ``m``. The test is relative, ``U^dagger U = I``
    within ``tol``, so the verdict does not change when ``m`` is rescaled.

    Returns
    -------
    tuple[float, CMatrix] | None
        ``(c, U)`` on success, ``None`` when ``m`` is zero or ``m^dagger m`` is
        not proportional to the identity.
    """
    _require_square(m, "is_unitary_up_to_constant")
    c = operator_norm(m)
    if c <= tol:
        return None
    u = m / c
    residual = np.linalg.norm(dagger(u) @ u - np.eye(m.shape[0]), 2)
    if residual > tol:
        return None
    return c, u


def proportionality_deviation(gram: CMatrix) -> CMatrix:
    """Return ``G - (tr G / D) I``; zero iff Hermitian ``G`` is proportional to I."""
    _require_square(gram, "proportionality_deviation")
    dim = gram.shape[0]
    return gram - (np.trace(gram) / dim) * np.eye(dim, dtype=np.complex128)


def is_proportional_to_unitary_and_tp(k: CMatrix, tol: float = TP_TOL) -> TpVerdict:
    """Single-Kraus TP test after normalization: ``k^dagger k`` proportional to I."""
    return "non_tp" if is_unitary_up_to_constant(k, tol) is None else "tp"


@dataclass(frozen=True, eq=False)
class KrausSet:
    """
    A weighted family of square operators.

    Physical channels carry weight 1 per element; induced correlation-space
    families carry the labels ``(j, s)`` of the error element and the outcome.
    Weights may be negative only for externally supplied families that are
    being checked, never for channels built by corrspace.
    """

    elements: tuple[CMatrix, ...]
    weights: tuple[float, ...] = ()
    labels: tuple[tuple[int, ...], ...] = ()
    dim: int = field(init=False)

    def __post_init__(self) -> None:
        if not self.elements:
            raise DimensionError("KrausSet needs at least one element")
        elements = tuple(
            to_cmatrix(e, f"kraus[{i}]") for i, e in enumerate(self.elements)
        )
        for i, element in enumerate(elements):
            _require_square(element, f"kraus[{i}]")
        dims = {e.shape[0] for e in elements}
        if len(dims) != 1:
            raise DimensionError(
                f"Kraus elements have mixed dimensions: {sorted(dims)}"
            )
        weights = self.weights or (1.0,) * len(elements)
        if len(weights) != len(elements):
            raise DimensionError(
                f"{len(weights)} weights given for {len(elements)} Kraus elements"
            )
        if not all(np.isfinite(w) for w in weights):
            raise DimensionError("Kraus weights must be finite")
        labels = self.labels or tuple((j,) for j in range(len(elements)))
        if len(labels) != len(elements):
            raise DimensionError("one label per Kraus element is required")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "weights", tuple(float(w) for w in weights))
        object.__setattr__(self, "labels", tuple(tuple(lab) for lab in labels))
        object.__setattr__(self, "dim", dims.pop())

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def has_nonnegative_weights(self) -> bool:
        return all(w >= 0 for w in self.weights)

    @classmethod
    def from_matrices(
        cls, matrices: Sequence[ArrayLike], weights: Sequence[float] = ()
    ) -> KrausSet:
        return cls(tuple(np.asarray(m) for m in matrices), tuple(weights))


def tp_deviation(kraus: KrausSet) -> CMatrix:
    """Return ``sum_i w_i K_i^dagger K_i - I``; the caller tests its norm."""
    total = np.zeros((kraus.dim, kraus.dim), dtype=np.complex128)
    for weight, element in zip(kraus.weights, kraus.elements, strict=True):
        total += weight * (dagger(element) @ element)
    return total - np.eye(kraus.dim, dtype=np.complex128)


def choi_matrix(kraus: KrausSet) -> CMatrix:
    """
    Choi matrix ``sum_i w_i (K_i x I)|Omega><Omega|(K_i x I)^dagger``.

    With the unnormalized ``|Omega> = sum_a |a>|a>``, the vector
    ``(K x I)|Omega>`` is the row-major flattening of ``K``.
    """
    dim = kraus.dim
    choi = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    for weight, element in zip(kraus.weights, kraus.elements, strict=True):
        vec = element.reshape(-1)
        choi += weight * np.outer(vec, vec.conj())
    return choi


def hermitian_residual(matrix: CMatrix) -> float:
    return float(np.linalg.norm(matrix - dagger(matrix), 2))


def is_psd(matrix: CMatrix, tol: float = TP_TOL) -> bool:
    """Hermitian within ``HERMITIAN_TOL`` and all eigenvalues >= -tol."""
    if hermitian_residual(matrix) >= HERMITIAN_TOL:
        return False
    hermitian = 0.5 * (matrix + dagger(matrix))
    eigenvalues = scipy.linalg.eigh(hermitian, eigvals_only=True)
    return bool(eigenvalues.min() >= -tol)


def choi_psd_check(kraus: KrausSet, tol: float = TP_TOL) -> bool:
    """Complete-positivity check of a weighted Kraus family through its Choi matrix."""
    return is_psd(choi_matrix(kraus), tol)


# === Standard operators ===

def identity(dim: int) -> CMatrix:
    return np.eye(dim, dtype=np.complex128)


def basis_ket(index: int, dim: int) -> CVector:
    if not 0 <= index < dim:
        raise DimensionError(f"basis index {index} out of range for dimension {dim}")
    ket = np.zeros(dim, dtype=np.complex128)
    ket[index] = 1.0
    return ket


def ket_bra(ket: ArrayLike, bra: ArrayLike) -> CMatrix:
    """``|ket><bra|``; ``bra`` is given as a ket and conjugated here."""
    return np.outer(np.asarray(ket, dtype=np.complex128), np.conj(bra))


PAULI_X: CMatrix = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Z: CMatrix = np.array([[1, 0], [0, -1]], dtype=np.complex128)
HADAMARD: CMatrix = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
KET_PLUS: CVector = np.array([1, 1], dtype=np.complex128) / np.sqrt(2)
KET_MINUS: CVector = np.array([1, -1], dtype=np.complex128) / np.sqrt(2)

for _constant in (PAULI_X, PAULI_Z, HADAMARD, KET_PLUS, KET_MINUS):
    _constant.setflags(write=False)


def s_z(theta: float) -> CMatrix:
    """Z rotation ``exp(-i Z theta / 2)``."""
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]).astype(np.complex128)


def j_gate(theta: float) -> CMatrix:
    """``J(theta) = H exp(i theta Z / 2)``."""
    return HADAMARD @ s_z(-theta)


def pauli_byproduct(p: int, q: int) -> CMatrix:
    """``X^p Z^q``."""
    x_part = np.linalg.matrix_power(PAULI_X, p % 2)
    return x_part @ np.linalg.matrix_power(PAULI_Z, q % 2)
