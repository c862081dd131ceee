"""Tests for the measurement protocols and the protocol factory."""

import unittest

import numpy as np

from corrspace.core.linalg import pauli_byproduct, s_z
from corrspace.core.resource import builtin
from corrspace.protocols import (
    AKLTRotationProtocol,
    ClusterProtocol,
    ProtocolFactory,
    TriclusterProtocol,
)
from corrspace.utils.errors import DimensionError


class TestProtocolFactory(unittest.TestCase):
    """Test suite for ProtocolFactory."""

    def test_auto_resolves_from_resource(self):
        for name, expected in (
            ("cluster", ClusterProtocol),
            ("aklt_modified", AKLTRotationProtocol),
            ("tricluster", TriclusterProtocol),
        ):
            res = builtin(name)
            params = {"theta": 0.2, "r": 3} if expected is AKLTRotationProtocol else {
                "angles": (0.1, 0.2, 0.3)
            }
            protocol = ProtocolFactory.get_protocol("auto", res, **params)
            self.assertIsInstance(protocol, expected)

    def test_unknown_type(self):
        with self.assertRaises(ValueError) as ctx:
            ProtocolFactory.get_protocol("teleport", builtin("cluster"))
        self.assertIn("Supported types", str(ctx.exception))

    def test_name_is_case_insensitive(self):
        self.assertEqual(
            ProtocolFactory.get_protocol_name("AKLT", builtin("aklt")), "aklt"
        )

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            ProtocolFactory.get_protocol("cluster", builtin("aklt"), angles=(0, 0, 0))


class TestClusterProtocol(unittest.TestCase):
    def test_flag_and_steps(self):
        protocol = ClusterProtocol(builtin("cluster"), (0.1, 0.2, 0.3))
        self.assertEqual(protocol.n_steps, 3)
        self.assertEqual(protocol.flag((1, 0, 1)), (1, 0))
        self.assertEqual(protocol.params()["angles"], [0.1, 0.2, 0.3])

    def test_angle_count(self):
        with self.assertRaises(ValueError):
            ClusterProtocol(builtin("cluster"), (0.1, 0.2))  # type: ignore[arg-type]


class TestTriclusterProtocol(unittest.TestCase):
    def test_flag(self):
        protocol = TriclusterProtocol(builtin("tricluster"), (0.0, 0.0, 0.0))
        # p(s3) = p(3) = 1, q(s3) xor p(s2) = 1 xor p(1) = 0
        self.assertEqual(protocol.flag((0, 1, 3)), (1, 0))


class TestAKLTProtocol(unittest.TestCase):
    def test_basis_switch(self):
        protocol = AKLTRotationProtocol(builtin("aklt"), 0.4, 3)
        self.assertEqual(protocol.basis(2, (0,)).label, "computational")
        self.assertNotEqual(protocol.basis(2, (2,)).label, "computational")
        with self.assertRaises(ValueError):
            protocol.basis(4, (2, 2, 2))

    def test_flag_and_target(self):
        protocol = AKLTRotationProtocol(builtin("aklt"), 0.4, 3)
        self.assertEqual(protocol.flag((2, 0, 1)), (0, 0))
        np.testing.assert_allclose(
            protocol.target_operator((1, 1)), pauli_byproduct(1, 1) @ s_z(0.4)
        )
        self.assertEqual(protocol.params()["r"], 3)

    def test_needs_steps(self):
        with self.assertRaises(ValueError):
            AKLTRotationProtocol(builtin("aklt"), 0.4, 0)
