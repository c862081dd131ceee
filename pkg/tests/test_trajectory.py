"""
Test suite for the trajectory method: single-branch operators, the search for
a non-TP branch under a unitary error, and state-dependent renormalization.
"""

import unittest

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrspace.core.channels import (
    depolarizing_error,
    exchange_error,
    paper_error_aklt_v2,
)
from corrspace.core.linalg import basis_ket, equal_up_to_phase, ket_bra
from corrspace.core.measurement import general_basis
from corrspace.core.resource import builtin
from corrspace.simulation.trajectory import (
    nontp_rescue_check,
    phase_constraint,
    theorem_scan,
    trajectory_step,
)
from corrspace.utils.errors import DimensionError


class TestTrajectoryStep(unittest.TestCase):
    """Operator of one outcome branch."""

    def test_cluster_equator_is_tp(self):
        res = builtin("cluster")
        result = trajectory_step(res, general_basis(np.pi / 2, 0.4, 2), None, 1)
        self.assertEqual(result.verdict, "tp")
        self.assertAlmostEqual(result.norm, 1 / np.sqrt(2))
        self.assertLess(result.tp_residual, 1e-12)

    def test_cluster_off_equator_is_not_tp(self):
        res = builtin("cluster")
        result = trajectory_step(res, general_basis(0.5, 0.0, 2), None, 0)
        self.assertEqual(result.verdict, "non_tp")
        self.assertGreater(result.tp_residual, 1e-3)

    def test_argument_checks(self):
        res = builtin("aklt")
        basis = general_basis(1.0, 0.0, 3)
        with self.assertRaises(DimensionError):
            trajectory_step(res, basis, None, 3)
        with self.assertRaises(DimensionError):
            trajectory_step(res, general_basis(1.0, 0.0, 2), None, 0)
        with self.assertRaises(DimensionError):
            trajectory_step(res, basis, exchange_error(0, 1, 2), 0)

    def test_multi_kraus_error_rejected(self):
        with self.assertRaises(ValueError):
            trajectory_step(
                builtin("aklt"),
                general_basis(1.0, 0.0, 3),
                depolarizing_error(0.1, 3),
                0,
            )

    def test_json(self):
        basis = general_basis(1.0, 0.0, 2)
        result = trajectory_step(builtin("cluster"), basis, None, 0)
        document = result.to_json()
        self.assertEqual(document["outcome"], 0)
        self.assertEqual(document["verdict"], "non_tp")


class TestPhaseConstraint(unittest.TestCase):
    def test_satisfied(self):
        value, satisfied = phase_constraint(3, np.pi / 2, 0, 0)
        self.assertTrue(satisfied)
        self.assertAlmostEqual(value, 0.0)

    def test_violated(self):
        value, satisfied = phase_constraint(3, 0.1, 0, 0)
        self.assertFalse(satisfied)
        self.assertAlmostEqual(value, 0.2)

    def test_shift_by_omega(self):
        # 2 phi + (t - s) 2pi/4 = pi/2 + pi/2
        _, satisfied = phase_constraint(4, np.pi / 4, 0, 1)
        self.assertTrue(satisfied)


class TestTheoremScan(unittest.TestCase):
    """Which construction produces the witness for each resource."""

    def test_aklt_second_construction(self):
        witness = theorem_scan(builtin("aklt"), np.pi / 2, 0.0)
        self.assertIsNotNone(witness)
        self.assertEqual(witness.construction, 2)
        self.assertEqual(witness.outcome, 0)
        self.assertEqual(witness.error.kind, "composed")

    def test_aklt_modified_second_construction(self):
        witness = theorem_scan(builtin("aklt_modified"), np.pi / 2, 0.0)
        self.assertEqual(witness.construction, 2)

    def test_tricluster_first_construction(self):
        witness = theorem_scan(builtin("tricluster"), 1.0, 0.3)
        self.assertEqual(witness.construction, 1)
        self.assertEqual(witness.outcome, 2)
        self.assertEqual(witness.error.params, {"a": 1, "b": 2})

    def test_qubit_resource_has_no_witness(self):
        diagnostics: dict = {}
        self.assertIsNone(theorem_scan(builtin("cluster"), 1.0, 0.0, diagnostics))
        self.assertIn("reason", diagnostics)
        self.assertEqual(len(diagnostics["constraints"]), 4)

    def test_diagnostics(self):
        diagnostics: dict = {}
        witness = theorem_scan(builtin("aklt"), np.pi / 2, 0.0, diagnostics)
        self.assertIsNotNone(witness)
        self.assertEqual(len(diagnostics["candidates"]), 7)
        self.assertAlmostEqual(diagnostics["eta"], 1 / 3)
        self.assertAlmostEqual(diagnostics["xi"], 1 / 3)
        self.assertEqual(len(diagnostics["epsilon"]), 9)
        self.assertEqual(len(witness.to_json()["constraint_data"]), 9)

    def test_witness_operator_is_not_tp(self):
        witness = theorem_scan(builtin("aklt"), 1.1, 0.4)
        gram = witness.operator.conj().T @ witness.operator
        off_identity = gram - np.trace(gram) / 2 * np.eye(2)
        self.assertGreater(np.linalg.norm(off_identity), 1e-6)


@pytest.mark.parametrize("name", ["aklt", "aklt_modified", "tricluster"])
@settings(max_examples=25, deadline=None)
@given(theta=st.floats(0.05, np.pi - 0.05), phi=st.floats(0.0, 2 * np.pi))
def test_qudit_resources_always_have_a_witness(name, theta, phi):
    witness = theorem_scan(builtin(name), theta, phi)
    assert witness is not None
    assert witness.construction in (1, 2, 3)


@pytest.mark.parametrize("name", ["aklt", "aklt_modified"])
@pytest.mark.parametrize("phi", [0.0, np.pi / 2, 2.3])
def test_v2_error_outcome_two_is_rank_one(name, phi):
    result = trajectory_step(
        builtin(name), general_basis(1.0, phi, 3), paper_error_aklt_v2(), 2
    )
    expected = ket_bra(basis_ket(1, 2), basis_ket(0, 2))
    assert result.verdict == "non_tp"
    assert equal_up_to_phase(result.normalized, expected, 1e-10)


class TestRescue(unittest.TestCase):
    """Renormalizing a non-TP branch depends on the input state."""

    def test_non_tp_branch_is_nonlinear(self):
        res = builtin("cluster")
        report = nontp_rescue_check(
            res, general_basis(0.6, 0.0, 2), None, 0, [[1, 0], [0, 1]]
        )
        self.assertFalse(report.proportional)
        self.assertTrue(report.nonlinear)
        self.assertGreater(report.additivity_residual, 1e-3)
        self.assertNotAlmostEqual(report.probe_norms[0], report.probe_norms[1])

    def test_tp_branch_is_linear(self):
        res = builtin("cluster")
        report = nontp_rescue_check(
            res, general_basis(np.pi / 2, 0.3, 2), None, 1, [[1, 0], [0.6, 0.8j]]
        )
        self.assertTrue(report.proportional)
        self.assertFalse(report.nonlinear)
        self.assertLess(report.additivity_residual, 1e-12)

    def test_annihilated_probe(self):
        res = builtin("aklt")
        report = nontp_rescue_check(
            res, general_basis(1.0, 0.0, 3), paper_error_aklt_v2(), 2, [[1, 0], [0, 1]]
        )
        self.assertIsNone(report.renormalized[1])
        self.assertIsNone(report.additivity_residual)
        self.assertEqual(report.to_json()["renormalized"][1], None)

    def test_probe_checks(self):
        res = builtin("cluster")
        basis = general_basis(1.0, 0.0, 2)
        with pytest.raises(DimensionError):
            nontp_rescue_check(res, basis, None, 0, [[0, 0]])
        with pytest.raises(DimensionError):
            nontp_rescue_check(res, basis, None, 0, [[1, 0, 0]])
