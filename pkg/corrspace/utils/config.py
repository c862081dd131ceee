"""Configuration module for the correlation-space simulator.

This module contains the numerical tolerances, size caps and registry names
used throughout corrspace. Values are fixed constants; nothing is read from
the environment. Per-call overrides go through function arguments or the
CLI run configuration.
"""

from typing import Final

VERSION: Final[str] = "0.1.0"
TOOL_NAME: Final[str] = "corrspace"

# Tolerances
TP_TOL: Final[float] = 1e-9
HERMITIAN_TOL: Final[float] = 1e-10
ORTHONORMAL_TOL: Final[float] = 1e-10
UNITARY_EXACT_TOL: Final[float] = 1e-12
PHASE_CONSTRAINT_TOL: Final[float] = 1e-9

# Validate tolerance ordering
if not 0 < UNITARY_EXACT_TOL <= HERMITIAN_TOL <= TP_TOL:
    error_msg = "Tolerances must satisfy 0 < UNITARY_EXACT_TOL <= HERMITIAN_TOL"
    error_msg += " <= TP_TOL"
    raise ValueError(error_msg)

# Size caps
MAX_MATRIX_DIM: Final[int] = 64
MAX_PHYSICAL_DIM: Final[int] = 8
MAX_BOND_DIM: Final[int] = 8
MAX_BRANCHES: Final[int] = 3_000_000
MAX_ORACLE_DIM: Final[int] = 3**8
DENSE_ORACLE_MAX_SITES: Final[int] = 5
MAX_AKLT_ENUMERATION_STEPS: Final[int] = 12
MAX_AKLT_FAST_PATH_STEPS: Final[int] = 60
MAX_COUNT_ENUMERATION_STEPS: Final[int] = 14
RANDOM_KRAUS_MAX_ROWS: Final[int] = 64

if MAX_PHYSICAL_DIM * MAX_BOND_DIM > MAX_MATRIX_DIM:
    error_msg = f"MAX_PHYSICAL_DIM * MAX_BOND_DIM exceeds {MAX_MATRIX_DIM}."
    raise ValueError(error_msg)

# Registries
BUILTIN_RESOURCES: Final[tuple[str, ...]] = (
    "cluster",
    "aklt",
    "aklt_modified",
    "tricluster",
)
SUPPORTED_PROTOCOLS: Final[tuple[str, ...]] = ("cluster", "aklt", "tricluster")
SUPPORTED_ERROR_KINDS: Final[tuple[str, ...]] = (
    "none",
    "identity",
    "random",
    "paper-aklt",
    "paper-aklt-v2",
    "exchange",
    "phase",
    "depolarizing",
    "file",
)

# Runtime Configuration
RUNS_BASE_DIR: Final[str] = "runs"
DEFAULT_SEED: Final[int] = 0
DEFAULT_AKLT_STEPS: Final[int] = 3
DEFAULT_ORACLE_SITES: Final[int] = 4
DEFAULT_RANDOM_KRAUS: Final[int] = 2

# Exit codes
EXIT_OK: Final[int] = 0
EXIT_SCIENTIFIC_FAILURE: Final[int] = 1
EXIT_USAGE_ERROR: Final[int] = 2


def tolerance_table() -> dict[str, float]:
    """Return the default tolerances as embedded in every report."""
    return {
        "tp": TP_TOL,
        "hermitian": HERMITIAN_TOL,
        "orthonormal": ORTHONORMAL_TOL,
        "unitary_exact": UNITARY_EXACT_TOL,
        "phase_constraint": PHASE_CONSTRAINT_TOL,
    }
