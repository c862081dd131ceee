"""
Test suite for physical error channels, error specifications and the induced
correlation-space Kraus family.
"""

import unittest

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrspace.core.channels import (
    ErrorSpec,
    compose,
    depolarizing_error,
    exchange_error,
    exchange_matrix,
    induced_kraus,
    load_error_spec,
    load_kraus_file,
    paper_error_aklt,
    paper_error_aklt_v2,
    phase_error,
    phase_matrix,
    random_cptp,
    validate_channel,
    weyl_operators,
)
from corrspace.core.linalg import (
    PAULI_X,
    PAULI_Z,
    KrausSet,
    basis_ket,
    choi_psd_check,
    ket_bra,
    operator_norm,
    tp_deviation,
)
from corrspace.core.measurement import (
    aklt_rotation_basis,
    computational_basis,
    general_basis,
)
from corrspace.core.resource import builtin
from corrspace.utils.errors import (
    CapExceededError,
    DimensionError,
    ResourceFormatError,
    TPViolationError,
)


def _assert_tp(kraus: KrausSet, tol: float = 1e-10) -> None:
    assert operator_norm(tp_deviation(kraus)) < tol


class TestUnitaryErrors(unittest.TestCase):
    """Exchange and phase errors."""

    def test_exchange_matrix(self):
        u = exchange_matrix(0, 2, 3)
        np.testing.assert_array_equal(u @ basis_ket(0, 3), basis_ket(2, 3))
        np.testing.assert_array_equal(u @ basis_ket(1, 3), basis_ket(1, 3))
        np.testing.assert_array_equal(u @ u, np.eye(3))

    def test_exchange_index_checks(self):
        with self.assertRaises(DimensionError):
            exchange_matrix(1, 1, 3)
        with self.assertRaises(DimensionError):
            exchange_matrix(0, 3, 3)

    def test_phase_power_cycles(self):
        v = phase_matrix(1, 3)
        np.testing.assert_allclose(np.linalg.matrix_power(v, 3), np.eye(3), atol=1e-12)
        np.testing.assert_allclose(phase_matrix(3, 3), np.eye(3), atol=1e-15)

    def test_phase_diagonal(self):
        v = phase_matrix(1, 4)
        np.testing.assert_allclose(np.diag(v), [1, -1j, -1, 1j], atol=1e-12)

    def test_unitary_errors_are_channels(self):
        _assert_tp(exchange_error(0, 1, 2))
        _assert_tp(phase_error(2, 5))


class TestNamedErrors(unittest.TestCase):
    def test_paper_error_induces_known_family(self):
        """On AKLT the error gives sqrt(2/3)|0><1|, sqrt(2/3)|1><0| and Z/sqrt(3)."""
        res = builtin("aklt")
        for theta in (0.0, 0.7, 2.1):
            basis = aklt_rotation_basis(theta)
            family = induced_kraus(res, basis, paper_error_aklt(basis))
            ket0, ket1 = basis_ket(0, 2), basis_ket(1, 2)
            expected = [
                np.sqrt(2 / 3) * ket_bra(ket0, ket1),
                np.sqrt(2 / 3) * ket_bra(ket1, ket0),
                PAULI_Z / np.sqrt(3),
            ]
            for got, want in zip(family.elements, expected, strict=True):
                np.testing.assert_allclose(got, want, atol=1e-12)

    def test_paper_error_needs_qutrit(self):
        with self.assertRaises(DimensionError):
            paper_error_aklt(computational_basis(2))

    def test_v2_outcome_two(self):
        res = builtin("aklt")
        basis = general_basis(1.0, 0.0, 3)
        family = induced_kraus(res, basis, paper_error_aklt_v2())
        element = family.elements[2]
        expected = np.sqrt(2 / 3) * ket_bra(basis_ket(1, 2), basis_ket(0, 2))
        np.testing.assert_allclose(element, expected, atol=1e-12)
        self.assertEqual(family.labels[2], (0, 2))

    def test_depolarizing(self):
        channel = depolarizing_error(0.3, 3)
        self.assertEqual(len(channel), 9)
        _assert_tp(channel)
        self.assertTrue(choi_psd_check(channel))
        with self.assertRaises(ValueError):
            depolarizing_error(1.5, 2)

    def test_weyl_operators_are_unitary(self):
        for op in weyl_operators(3):
            np.testing.assert_allclose(op @ op.conj().T, np.eye(3), atol=1e-12)

    def test_random_is_seeded(self):
        first = random_cptp(3, 2, seed=7)
        second = random_cptp(3, 2, seed=7)
        for a, b in zip(first.elements, second.elements, strict=True):
            np.testing.assert_array_equal(a, b)
        _assert_tp(first)

    def test_random_caps(self):
        with self.assertRaises(CapExceededError):
            random_cptp(8, 9, seed=0)
        with self.assertRaises(ValueError):
            random_cptp(2, 0, seed=0)


class TestComposeAndValidate(unittest.TestCase):
    def test_compose_order(self):
        """The rightmost channel acts first."""
        outer = KrausSet.from_matrices([PAULI_X])
        inner = KrausSet.from_matrices([PAULI_Z])
        composed = compose(outer, inner)
        np.testing.assert_allclose(composed.elements[0], PAULI_X @ PAULI_Z)

    def test_compose_mixed_channels(self):
        composed = compose(depolarizing_error(0.2, 2), exchange_error(0, 1, 2))
        self.assertEqual(len(composed), 4)
        _assert_tp(composed)

    def test_validate_rejects_non_tp(self):
        with self.assertRaises(TPViolationError):
            validate_channel(KrausSet.from_matrices([2 * np.eye(2)]))

    def test_validate_rejects_negative_weights(self):
        kraus = KrausSet.from_matrices([np.eye(2), np.eye(2)], weights=[2.0, -1.0])
        with self.assertRaises(TPViolationError):
            validate_channel(kraus)


class TestInducedKraus(unittest.TestCase):
    """The induced family ``E_{j,s}`` on the correlation space."""

    def test_labels_order(self):
        res = builtin("cluster")
        family = induced_kraus(
            res, general_basis(0.5, 0.1, 2), depolarizing_error(0.1, 2)
        )
        self.assertEqual(family.labels[:3], ((0, 0), (0, 1), (1, 0)))
        self.assertEqual(len(family), 8)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            induced_kraus(
                builtin("aklt"), general_basis(0.5, 0.0, 3), exchange_error(0, 1, 2)
            )

    def test_non_tp_error_rejected(self):
        with self.assertRaises(TPViolationError):
            induced_kraus(
                builtin("cluster"),
                computational_basis(2),
                KrausSet.from_matrices([0.5 * np.eye(2)]),
            )


class TestErrorSpec(unittest.TestCase):
    def test_realize_kinds(self):
        basis = aklt_rotation_basis(0.3)
        for spec in (
            ErrorSpec("identity"),
            ErrorSpec("exchange", {"a": 0, "b": 2}),
            ErrorSpec("phase_power", {"s": 1}),
            ErrorSpec("depolarizing", {"p": 0.5}),
            ErrorSpec("random", {"n_kraus": 3, "seed": 1}),
            ErrorSpec("paper_aklt"),
            ErrorSpec("paper_aklt_v2"),
            ErrorSpec(
                "composed",
                parts=(ErrorSpec("exchange", {"a": 0, "b": 1}), ErrorSpec("identity")),
            ),
        ):
            _assert_tp(spec.realize(3, basis))

    def test_unknown_kind(self):
        with self.assertRaises(ValueError):
            ErrorSpec("bitflip").realize(2)

    def test_missing_parameter(self):
        with self.assertRaises(ValueError):
            ErrorSpec("exchange", {"a": 0}).realize(3)

    def test_paper_error_needs_basis(self):
        with self.assertRaises(ValueError):
            ErrorSpec("paper_aklt").realize(3)

    def test_to_json(self):
        spec = ErrorSpec("composed", parts=(ErrorSpec("phase_power", {"s": 2}),))
        expected = {"kind": "composed", "parts": [{"kind": "phase_power", "s": 2}]}
        self.assertEqual(spec.to_json(), expected)


class TestErrorFiles(unittest.TestCase):
    def test_load_error_spec(self):
        text = '[error]\nkind = "exchange"\na = 0\nb = 2\n'
        spec = load_error_spec(text)
        self.assertEqual(spec.kind, "exchange")
        self.assertEqual(spec.params, {"a": 0, "b": 2})

    def test_load_composed_spec(self):
        text = (
            '[error]\nkind = "composed"\n'
            '[[error.parts]]\nkind = "exchange"\na = 1\nb = 2\n'
            '[[error.parts]]\nkind = "phase_power"\ns = 1\n'
        )
        spec = load_error_spec(text)
        self.assertEqual([p.kind for p in spec.parts], ["exchange", "phase_power"])

    def test_custom_kraus_spec(self):
        text = (
            '[error]\nkind = "custom_kraus"\n'
            "kraus = [[[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]]\n"
        )
        kraus = load_error_spec(text).realize(2)
        np.testing.assert_allclose(kraus.elements[0], PAULI_X)

    def test_unknown_kind_reports_line(self):
        with self.assertRaises(ResourceFormatError) as ctx:
            load_error_spec('[error]\nkind = "bitflip"\n')
        self.assertEqual(ctx.exception.lineno, 2)

    def test_missing_table(self):
        with self.assertRaises(ResourceFormatError):
            load_error_spec('kind = "identity"\n')

    def test_kraus_file_keeps_weights(self):
        text = (
            "kraus = [\n"
            "  [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],\n"
            "  [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]],\n"
            "]\n"
            "weights = [0.5, 0.5]\n"
        )
        kraus = load_kraus_file(text)
        self.assertEqual(kraus.weights, (0.5, 0.5))
        _assert_tp(kraus)

    def test_kraus_file_needs_list(self):
        with self.assertRaises(ResourceFormatError):
            load_kraus_file("weights = [1.0]\n")


@settings(max_examples=100, deadline=None)
@given(
    name=st.sampled_from(["cluster", "aklt", "aklt_modified", "tricluster"]),
    seed=st.integers(0, 2**31 - 1),
    n_kraus=st.integers(1, 4),
    theta=st.floats(0.05, np.pi - 0.05),
    phi=st.floats(0.0, 2 * np.pi),
)
def test_induced_family_is_tp(name, seed, n_kraus, theta, phi):
    """Any physical channel induces a TP family when ``sum A^dagger A = I``."""
    res = builtin(name)
    err = random_cptp(res.d, n_kraus, seed)
    family = induced_kraus(res, general_basis(theta, phi, res.d), err)
    assert len(family) == res.d * n_kraus
    _assert_tp(family, 1e-9)


@pytest.mark.parametrize("name,d", [("cluster", 2), ("tricluster", 6)])
def test_induced_family_is_tp_on_builtins(name, d):
    err = random_cptp(d, 2, seed=11)
    family = induced_kraus(builtin(name), computational_basis(d), err)
    _assert_tp(family, 1e-9)
