import json
import logging
import os
from pathlib import Path
from typing import Any

from corrspace.utils.config import (
    EXIT_OK,
    EXIT_SCIENTIFIC_FAILURE,
    EXIT_USAGE_ERROR,
)
from corrspace.utils.errors import ScientificAssertionError


def ensure_directory_exists(directory_path: str | Path) -> None:
    """
    Ensures that a directory exists, creating it if necessary.

    Args:
        directory_path: Path to the directory to ensure exists
    """
    try:
        os.makedirs(directory_path, exist_ok=True)
    except OSError as e:
        logging.error("Error creating directory %s: %s", directory_path, e)
        raise


def render_json(report: dict[str, Any]) -> str:
    """Render a report deterministically: sorted keys, 2-space indent."""
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_report(path: str | Path, text: str) -> Path:
    """Write a rendered report as UTF-8, creating parent directories.

    Args:
        path: Destination file
        text: Rendered JSON document or CSV table

    Returns:
        The path written
    """
    target = Path(path)
    ensure_directory_exists(target.parent)
    target.write_text(text, encoding="utf-8")
    logging.info("Wrote report: %s", target)
    return target


def exit_code_for(error: BaseException) -> int:
    """Exit code of a failed command: 1 for scientific failures, 2 for bad input."""
    if isinstance(error, ScientificAssertionError):
        return EXIT_SCIENTIFIC_FAILURE
    if isinstance(error, ValueError | OSError | TypeError | KeyError):
        return EXIT_USAGE_ERROR
    return EXIT_SCIENTIFIC_FAILURE


def build_failure_response(error: BaseException) -> dict[str, Any]:
    return {
        "success": False,
        "error": str(error),
        "exit_code": exit_code_for(error),
    }


def build_success_response(
    report: dict[str, Any], passed: bool = True
) -> dict[str, Any]:
    return {
        "success": True,
        "report": report,
        "exit_code": EXIT_OK if passed else EXIT_SCIENTIFIC_FAILURE,
    }
