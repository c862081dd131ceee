"""Tests for the command pipelines and their exit codes."""

from unittest.mock import patch

import numpy as np
import pytest

from corrspace.core.channels import ErrorSpec
from corrspace.core.linalg import KrausSet
from corrspace.pipelines.counts_pipeline import CSV_COLUMNS, run_counts_pipeline
from corrspace.pipelines.oracle_pipeline import run_oracle_compare_pipeline
from corrspace.pipelines.simulate_pipeline import resolve_error, run_simulate_pipeline
from corrspace.pipelines.theorem_scan_pipeline import run_theorem_scan_pipeline
from corrspace.pipelines.validation_pipeline import (
    run_check_cptp_pipeline,
    run_validate_resource_pipeline,
)
from corrspace.utils.errors import ScientificAssertionError

ANGLES = (0.3, -1.1, 2.4)

IDENTITY_AND_Z = """\
kraus = [
  [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
  [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]],
]
"""


@pytest.fixture
def failing_cluster_run():
    """Make the cluster ensemble raise a scientific failure."""
    with patch(
        "corrspace.pipelines.simulate_pipeline.run_cluster",
        side_effect=ScientificAssertionError("induced family is not TP"),
    ) as mock:
        yield mock


# === resolve_error ===

@pytest.mark.parametrize(
    "option,expected",
    [
        ("exchange:0,2", ErrorSpec("exchange", {"a": 0, "b": 2})),
        ("phase:1", ErrorSpec("phase_power", {"s": 1})),
        ("depolarizing:0.25", ErrorSpec("depolarizing", {"p": 0.25})),
        ("random", ErrorSpec("random", {"n_kraus": 2, "seed": 0})),
        ("paper-aklt", ErrorSpec("paper_aklt")),
        ("paper-aklt-v2", ErrorSpec("paper_aklt_v2")),
        ("identity", ErrorSpec("identity")),
    ],
)
def test_resolve_error_options(option, expected):
    assert resolve_error(option) == expected


def test_resolve_error_none():
    assert resolve_error("none") is None


@pytest.mark.parametrize("option", ["bitflip", "exchange:0", "phase:x", "file"])
def test_resolve_error_rejects(option):
    with pytest.raises(ValueError):
        resolve_error(option)


def test_resolve_error_files(kraus_file):
    spec_path = kraus_file('[error]\nkind = "phase_power"\ns = 2\n', "spec.toml")
    assert resolve_error("file", spec_path) == ErrorSpec("phase_power", {"s": 2})

    kraus_path = kraus_file(IDENTITY_AND_Z + "weights = [0.5, 0.5]\n")
    resolved = resolve_error("file", kraus_path)
    assert isinstance(resolved, KrausSet)
    assert len(resolved) == 2


# === simulate ===

def test_simulate_cluster_is_cptp():
    response = run_simulate_pipeline("cluster", angles=ANGLES, error="random")
    assert response["success"]
    assert response["exit_code"] == 0
    assert response["report"]["verdict"] == "cptp"


def test_simulate_aklt_reports_non_tp():
    response = run_simulate_pipeline(
        "aklt", theta=0.7, r=3, error="paper-aklt", fast_path=True
    )
    assert response["exit_code"] == 0
    assert response["report"]["verdict"] == "non_tp_sector"
    assert response["report"]["failing_sectors"]


def test_simulate_scientific_failure(failing_cluster_run):
    response = run_simulate_pipeline("cluster", angles=ANGLES)
    assert not response["success"]
    assert response["exit_code"] == 1
    failing_cluster_run.assert_called_once()


def test_simulate_unknown_resource():
    response = run_simulate_pipeline("ghz")
    assert response["exit_code"] == 2


def test_simulate_rejects_non_tp_error_file(kraus_file):
    path = kraus_file(IDENTITY_AND_Z)
    response = run_simulate_pipeline(
        "cluster", angles=ANGLES, error="file", error_file=path
    )
    assert response["exit_code"] == 2
    assert "trace preserving" in response["error"]


# === counts ===

def test_counts_json():
    response = run_counts_pipeline(6)
    assert response["exit_code"] == 0
    report = response["report"]
    assert report["mismatches"] == []
    assert report["failed_identities"] == []
    assert set(report["identities"]) == {"2", "3", "4", "5", "6"}
    assert "csv" not in report


def test_counts_csv_header():
    response = run_counts_pipeline(3, output_format="csv")
    lines = response["report"]["csv"].splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    # r = 1 has only U rows; r = 2, 3 have 4 U + 4 S + 12 T rows each
    assert len(lines) == 1 + 4 + 2 * 20


def test_counts_beyond_enumeration_cap():
    response = run_counts_pipeline(15, r_min=15)
    assert response["exit_code"] == 0
    assert all(row["enumeration"] is None for row in response["report"]["rows"])


@pytest.mark.parametrize("r_min,r_max", [(5, 4), (0, 3)])
def test_counts_bad_range(r_min, r_max):
    assert run_counts_pipeline(r_max, r_min=r_min)["exit_code"] == 2


# === theorem scan ===

def test_theorem_scan_aklt():
    response = run_theorem_scan_pipeline("aklt", np.pi / 2, 0.0)
    assert response["exit_code"] == 0
    assert response["report"]["result"] == "witness"
    assert response["report"]["witness"]["construction"] == 2


def test_theorem_scan_qubit():
    response = run_theorem_scan_pipeline("cluster", 1.0, 0.0, dump_diagnostics=True)
    assert response["exit_code"] == 0
    assert response["report"]["result"] == "no witness"
    assert "diagnostics" in response["report"]


def test_theorem_scan_missing_witness_fails():
    with patch(
        "corrspace.pipelines.theorem_scan_pipeline.theorem_scan", return_value=None
    ):
        response = run_theorem_scan_pipeline("aklt", 1.0, 0.0)
    assert response["exit_code"] == 1


def test_theorem_scan_bad_angle():
    assert run_theorem_scan_pipeline("aklt", 0.0, 0.0)["exit_code"] == 2


# === oracle ===

def test_oracle_cluster():
    response = run_oracle_compare_pipeline(
        "cluster", n=4, angles=ANGLES, error="random"
    )
    assert response["exit_code"] == 0
    assert response["report"]["max_deviation"] < 1e-9


def test_oracle_aklt_default_steps():
    response = run_oracle_compare_pipeline("aklt", n=4, theta=0.6, error="paper-aklt")
    assert response["exit_code"] == 0
    assert response["report"]["protocol"]["r"] == 3


def test_oracle_chain_too_short():
    assert run_oracle_compare_pipeline("cluster", n=3)["exit_code"] == 2


# === validation ===

@pytest.mark.parametrize(
    "resource,basis,exit_code",
    [
        ("aklt", "aklt", 0),
        ("aklt", "computational", 0),
        ("tricluster", "protocol", 0),
        ("cluster", "general", 1),
        ("tricluster", "general", 1),
    ],
)
def test_validate_resource(resource, basis, exit_code):
    response = run_validate_resource_pipeline(resource, basis, theta=0.9)
    assert response["exit_code"] == exit_code


def test_validate_unknown_basis():
    basis = "fourier"
    response = run_validate_resource_pipeline("aklt", basis)  # type: ignore[arg-type]
    assert response["exit_code"] == 2


def test_check_cptp_valid(kraus_file):
    path = kraus_file(IDENTITY_AND_Z + "weights = [0.5, 0.5]\n")
    response = run_check_cptp_pipeline(path)
    assert response["exit_code"] == 0
    assert response["report"]["trace_preserving"]
    assert response["report"]["choi_psd"]


def test_check_cptp_not_tp(kraus_file):
    response = run_check_cptp_pipeline(kraus_file(IDENTITY_AND_Z))
    assert response["exit_code"] == 1
    assert response["report"]["tp_deviation_norm"] == pytest.approx(1.0)


def test_check_cptp_negative_weight(kraus_file):
    path = kraus_file(IDENTITY_AND_Z + "weights = [1.5, -0.5]\n")
    response = run_check_cptp_pipeline(path)
    assert response["exit_code"] == 1
    assert response["report"]["trace_preserving"]
    assert not response["report"]["choi_psd"]
    assert not response["report"]["nonnegative_weights"]


def test_check_cptp_missing_file(tmp_path):
    response = run_check_cptp_pipeline(str(tmp_path / "absent.toml"))
    assert response["exit_code"] == 2
