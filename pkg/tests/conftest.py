"""
Test configuration file for pytest.

This file sets up the test environment and provides fixtures that can be
reused across tests.
"""

import sys
from pathlib import Path

import pytest

# Add the project root to sys.path to allow importing from the package
sys.path.insert(0, str(Path(__file__).parent.parent))


@pytest.fixture
def kraus_file(tmp_path):
    """Write a Kraus TOML file and return its path."""

    def _write(text: str, name: str = "kraus.toml") -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return _write
