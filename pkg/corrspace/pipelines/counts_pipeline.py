"""Counts pipeline: closed-form outcome counts against brute-force enumeration."""

import csv
import io
import logging
from typing import Any, Literal

from corrspace.simulation.combinat import (
    COUNT_KINDS,
    check_identities,
    count_table,
)
from corrspace.utils.common import build_failure_response, build_success_response
from corrspace.utils.config import MAX_COUNT_ENUMERATION_STEPS

CSV_COLUMNS = ("kind", "r", "p", "q", "i", "closed_form", "enumeration", "match")

# === Helper functions (Single Responsibility) ===

def _rows_for(r: int) -> list[dict[str, Any]]:
    rows: list[dict[str, Any]] = []
    enumerable = r <= MAX_COUNT_ENUMERATION_STEPS
    for kind in COUNT_KINDS:
        if kind != "U" and r < 2:
            continue
        closed = count_table(kind, r, "closed_form")
        enumerated = count_table(kind, r, "enumeration") if enumerable else None
        for key, value in closed.entries.items():
            brute = enumerated.entries[key] if enumerated else None
            rows.append(
                {
                    "kind": kind,
                    "r": r,
                    "p": key[0],
                    "q": key[1],
                    "i": key[2] if kind == "T" else None,
                    "closed_form": value,
                    "enumeration": brute,
                    "match": None if brute is None else brute == value,
                }
            )
    return rows


def render_csv(rows: list[dict[str, Any]]) -> str:
    """Count rows as CSV with a header line; missing values are empty cells."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: "" if v is None else v for k, v in row.items()})
    return buffer.getvalue()


# === Public API ===

def run_counts_pipeline(
    r_max: int, r_min: int = 1, output_format: Literal["json", "csv"] = "json"
) -> dict[str, Any]:
    """Tabulate ``|U|``, ``|S|`` and ``|T|`` for ``r_min..r_max``.

    Returns:
        ``success``, ``report`` and ``exit_code``; the exit code is 1 when a
        closed form differs from enumeration or an identity fails. With the CSV
        format the report also carries the table text under ``csv``.
    """
    try:
        if not 1 <= r_min <= r_max:
            raise ValueError(f"need 1 <= r_min <= r_max, got {r_min}..{r_max}")
        if output_format not in ("json", "csv"):
            raise ValueError(f"unknown format {output_format!r}; use json or csv")

        rows = [row for r in range(r_min, r_max + 1) for row in _rows_for(r)]
        identities = {
            str(r): check_identities(r) for r in range(max(2, r_min), r_max + 1)
        }
        mismatches = [row for row in rows if row["match"] is False]
        failed_identities = [
            f"{r}:{name}"
            for r, checks in identities.items()
            for name, ok in checks.items()
            if not ok
        ]
        logging.info(
            "[Counts Pipeline] r=%d..%d: %d cells, %d mismatches",
            r_min,
            r_max,
            len(rows),
            len(mismatches),
        )
        report: dict[str, Any] = {
            "r_min": r_min,
            "r_max": r_max,
            "rows": rows,
            "identities": identities,
            "mismatches": mismatches,
            "failed_identities": failed_identities,
        }
        if output_format == "csv":
            report["csv"] = render_csv(rows)
        return build_success_response(
            report, passed=not mismatches and not failed_identities
        )
    except Exception as e:
        logging.exception("[Counts Pipeline] Error: %s", e)
        return build_failure_response(e)
