"""Conversion between numpy arrays and the JSON/TOML text formats.

Complex numbers are written as two-element arrays ``[re, im]`` and matrices as
row-major nested arrays of such pairs. Floats are always written as floats so
that TOML arrays stay homogeneous.
"""

import math
import re
from typing import Any

import numpy as np
import toml
from numpy.typing import NDArray

from corrspace.utils.errors import ResourceFormatError


def complex_to_json(value: complex) -> list[float]:
    """Encode a complex number as ``[re, im]``."""
    z = complex(value)
    return [float(z.real), float(z.imag)]


def complex_from_json(value: Any, where: str = "value") -> complex:
    """Decode ``[re, im]`` (or a bare real number) into a complex number.

    Raises:
        ResourceFormatError: If the value is not a finite numeric pair
    """
    if isinstance(value, bool):
        raise ResourceFormatError(f"{where}: expected a number, got a boolean")
    if isinstance(value, int | float):
        parts = [value, 0.0]
    elif isinstance(value, list | tuple) and len(value) == 2:
        parts = list(value)
    else:
        raise ResourceFormatError(f"{where}: expected [re, im], got {value!r}")

    for part in parts:
        if isinstance(part, bool) or not isinstance(part, int | float):
            raise ResourceFormatError(f"{where}: non-numeric entry {part!r}")
        if not math.isfinite(part):
            raise ResourceFormatError(f"{where}: non-finite entry {part!r}")
    return complex(float(parts[0]), float(parts[1]))


def vector_to_json(vector: NDArray[np.complex128]) -> list[list[float]]:
    return [complex_to_json(z) for z in np.asarray(vector).ravel()]


def vector_from_json(value: Any, where: str = "vector") -> NDArray[np.complex128]:
    if not isinstance(value, list) or not value:
        raise ResourceFormatError(f"{where}: expected a non-empty list")
    return np.array(
        [complex_from_json(z, f"{where}[{i}]") for i, z in enumerate(value)],
        dtype=np.complex128,
    )


def matrix_to_json(matrix: NDArray[np.complex128]) -> list[list[list[float]]]:
    """Encode a matrix as row-major nested arrays of ``[re, im]`` pairs."""
    return [[complex_to_json(z) for z in row] for row in np.atleast_2d(matrix)]


def matrix_from_json(value: Any, where: str = "matrix") -> NDArray[np.complex128]:
    """Decode a row-major nested array into a complex matrix.

    Raises:
        ResourceFormatError: If rows are ragged or entries are not numeric
    """
    if not isinstance(value, list) or not value:
        raise ResourceFormatError(f"{where}: expected a non-empty list of rows")
    rows = [vector_from_json(row, f"{where}[{i}]") for i, row in enumerate(value)]
    if len({row.shape[0] for row in rows}) != 1:
        raise ResourceFormatError(f"{where}: rows have different lengths")
    return np.vstack(rows)


def load_toml_text(text: str) -> dict[str, Any]:
    """Parse TOML text, turning decoder failures into ResourceFormatError.

    Raises:
        ResourceFormatError: With the line number reported by the decoder
    """
    try:
        return toml.loads(text)
    except toml.TomlDecodeError as e:
        raise ResourceFormatError(e.msg, lineno=e.lineno) from e


def dump_toml(document: dict[str, Any]) -> str:
    return toml.dumps(document)


def locate_line(text: str, key: str) -> int | None:
    """Return the 1-based line where ``key`` is assigned or opens a table."""
    pattern = re.compile(rf"^\s*(\[+\s*)?{re.escape(key)}\s*(=|\])")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if pattern.match(line):
            return lineno
    return None
