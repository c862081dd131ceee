"""
Test suite for the utility modules.

Covers the exception hierarchy and exit codes, the JSON/TOML conversions of
complex arrays, report rendering and the run-directory setup.
"""

import json
import unittest
from pathlib import Path

import numpy as np
import pytest

from corrspace.utils.common import (
    build_failure_response,
    build_success_response,
    exit_code_for,
    render_json,
    write_report,
)
from corrspace.utils.config import tolerance_table
from corrspace.utils.errors import (
    CapExceededError,
    ConfigError,
    DimensionError,
    ResourceFormatError,
    ScientificAssertionError,
    TPViolationError,
)
from corrspace.utils.serialization import (
    complex_from_json,
    complex_to_json,
    load_toml_text,
    locate_line,
    matrix_from_json,
    matrix_to_json,
)
from corrspace.utils.setup import setup_run_directory


class TestExitCodes(unittest.TestCase):
    """Exit codes derived from exception types."""

    def test_input_errors_map_to_usage_code(self):
        """Malformed input of any kind is a usage error."""
        for error in (
            ConfigError("x"),
            DimensionError("x"),
            ResourceFormatError("x"),
            TPViolationError("x"),
            CapExceededError("x"),
            ValueError("x"),
            FileNotFoundError("x"),
            TypeError("x"),
            KeyError("x"),
        ):
            self.assertEqual(exit_code_for(error), 2, type(error).__name__)

    def test_scientific_failure_maps_to_one(self):
        self.assertEqual(exit_code_for(ScientificAssertionError("x")), 1)
        self.assertEqual(exit_code_for(RuntimeError("x")), 1)

    def test_scientific_error_is_an_assertion(self):
        self.assertTrue(issubclass(ScientificAssertionError, AssertionError))

    def test_responses(self):
        failure = build_failure_response(DimensionError("bad shape"))
        self.assertEqual(
            failure, {"success": False, "error": "bad shape", "exit_code": 2}
        )
        self.assertEqual(build_success_response({"a": 1})["exit_code"], 0)
        self.assertEqual(build_success_response({"a": 1}, passed=False)["exit_code"], 1)


class TestResourceFormatError(unittest.TestCase):
    def test_line_number_in_message(self):
        error = ResourceFormatError("bad value", lineno=7)
        self.assertEqual(error.lineno, 7)
        self.assertIn("line 7", str(error))

    def test_without_line_number(self):
        error = ResourceFormatError("bad value")
        self.assertIsNone(error.lineno)
        self.assertEqual(str(error), "bad value")


class TestSerialization(unittest.TestCase):
    """Complex numbers and matrices in the text formats."""

    def test_complex_pair(self):
        self.assertEqual(complex_to_json(1 - 2j), [1.0, -2.0])
        self.assertEqual(complex_from_json([1, -2]), 1 - 2j)
        self.assertEqual(complex_from_json(0.5), 0.5 + 0j)

    def test_rejects_non_numeric(self):
        with self.assertRaises(ResourceFormatError):
            complex_from_json(["a", 0])
        with self.assertRaises(ResourceFormatError):
            complex_from_json(True)
        with self.assertRaises(ResourceFormatError):
            complex_from_json([1.0, float("nan")])

    def test_matrix_layout_is_row_major(self):
        matrix = np.array([[1, 2j], [3, 4]], dtype=np.complex128)
        encoded = matrix_to_json(matrix)
        self.assertEqual(encoded[0][1], [0.0, 2.0])
        np.testing.assert_array_equal(matrix_from_json(encoded), matrix)

    def test_ragged_rows_rejected(self):
        with self.assertRaises(ResourceFormatError):
            matrix_from_json([[[1, 0], [0, 0]], [[1, 0]]])

    def test_toml_syntax_error_carries_line(self):
        with self.assertRaises(ResourceFormatError) as ctx:
            load_toml_text('d = 2\nD = \n')
        self.assertIsNotNone(ctx.exception.lineno)

    def test_locate_line(self):
        text = "name = 'x'\n\nd = 2\n[error]\nkind = 'identity'\n"
        self.assertEqual(locate_line(text, "d"), 3)
        self.assertEqual(locate_line(text, "error"), 4)
        self.assertIsNone(locate_line(text, "missing"))


class TestReports(unittest.TestCase):
    def test_render_json_is_deterministic(self):
        first = render_json({"b": 1, "a": [1.5, None]})
        second = render_json({"a": [1.5, None], "b": 1})
        self.assertEqual(first, second)
        self.assertTrue(first.endswith("\n"))
        self.assertEqual(json.loads(first), {"a": [1.5, None], "b": 1})

    def test_tolerance_table(self):
        table = tolerance_table()
        self.assertEqual(table["tp"], 1e-9)
        self.assertLessEqual(table["unitary_exact"], table["hermitian"])


def test_write_report_creates_parents(tmp_path):
    target = tmp_path / "nested" / "dir" / "report.json"
    written = write_report(target, render_json({"verdict": "cptp"}))
    assert written == target
    assert json.loads(target.read_text(encoding="utf-8")) == {"verdict": "cptp"}


def test_write_report_keeps_csv_text(tmp_path):
    target = tmp_path / "counts.csv"
    write_report(target, "r,n\n3,2\n")
    assert target.read_text(encoding="utf-8") == "r,n\n3,2\n"


def test_setup_run_directory(tmp_path):
    run_dir = setup_run_directory(str(tmp_path / "runs"))
    assert run_dir.is_dir()
    assert Path(run_dir).parent == tmp_path / "runs"


@pytest.mark.parametrize("value", [0.0, -1.25, 3e-12, 1e6])
def test_real_scalars_decode(value):
    assert complex_from_json(value) == complex(value, 0.0)
