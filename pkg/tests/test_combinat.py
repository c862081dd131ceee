"""
Test suite for the AKLT outcome-count formulas.

Closed forms are checked against brute-force enumeration and against the
tabulated values at small r.
"""

import unittest

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrspace.simulation.combinat import (
    check_identities,
    count_closed,
    count_enumerate,
    count_table,
    h_indicator,
    parity_f,
    parity_g,
    table_keys,
)
from corrspace.utils.errors import CapExceededError

SECTORS = [(0, 0), (0, 1), (1, 0), (1, 1)]


class TestParities(unittest.TestCase):
    def test_single_symbols(self):
        self.assertEqual((parity_f([0]), parity_g([0])), (1, 0))
        self.assertEqual((parity_f([1]), parity_g([1])), (1, 1))
        self.assertEqual((parity_f([2]), parity_g([2])), (0, 1))

    def test_sequence(self):
        self.assertEqual(parity_f([0, 1, 2]), 0)
        self.assertEqual(parity_g([0, 1, 2]), 0)

    def test_invalid_symbol(self):
        with self.assertRaises(ValueError):
            parity_f([3])

    def test_h_indicator(self):
        self.assertEqual(h_indicator(0, 1, 3), 1)
        self.assertEqual(h_indicator(0, 0, 4), 1)
        self.assertEqual(h_indicator(0, 0, 3), 0)
        self.assertEqual(h_indicator(1, 1, 3), 0)
        with self.assertRaises(ValueError):
            h_indicator(0, 0, 0)


class TestClosedForms(unittest.TestCase):
    """Known values of the tables."""

    def test_u_small(self):
        self.assertEqual([count_closed("U", 1, p, q) for p, q in SECTORS], [0, 1, 1, 1])
        self.assertEqual([count_closed("U", 2, p, q) for p, q in SECTORS], [3, 2, 2, 2])

    def test_s_three(self):
        self.assertEqual([count_closed("S", 3, p, q) for p, q in SECTORS], [6, 6, 7, 7])

    def test_t_sector_10_r4(self):
        self.assertEqual([count_closed("T", 4, 1, 0, i) for i in range(3)], [6, 7, 7])

    def test_t_sector_10_r3(self):
        self.assertEqual([count_closed("T", 3, 1, 0, i) for i in range(3)], [3, 2, 2])

    def test_argument_checks(self):
        with self.assertRaises(ValueError):
            count_closed("S", 1, 0, 0)
        with self.assertRaises(ValueError):
            count_closed("T", 3, 0, 0)
        with self.assertRaises(ValueError):
            count_closed("U", 3, 2, 0)
        with self.assertRaises(ValueError):
            count_closed("V", 3, 0, 0)  # type: ignore[arg-type]


class TestEnumeration(unittest.TestCase):
    def test_cap(self):
        with self.assertRaises(CapExceededError):
            count_enumerate("U", 15, 0, 0)

    def test_totals(self):
        self.assertEqual(count_table("U", 5, "enumeration").total, 3**5)
        self.assertEqual(count_table("S", 5, "enumeration").total, 3**5 - 1)
        self.assertEqual(count_table("T", 5, "enumeration").total, 3**5 - 1)

    def test_table_keys(self):
        self.assertEqual(len(table_keys("U")), 4)
        self.assertEqual(len(table_keys("T")), 12)

    def test_table_json(self):
        table = count_table("U", 2, "closed_form").to_json()
        self.assertEqual(table["entries"], {"0,0": 3, "0,1": 2, "1,0": 2, "1,1": 2})


@pytest.mark.parametrize("r", range(2, 13))
@pytest.mark.parametrize("kind", ["U", "S", "T"])
def test_closed_form_matches_enumeration(kind, r):
    closed = count_table(kind, r, "closed_form")
    enumerated = count_table(kind, r, "enumeration")
    assert closed.entries == enumerated.entries


@pytest.mark.parametrize("r", range(2, 15))
def test_identities_hold(r):
    results = check_identities(r)
    assert all(results.values()), [name for name, ok in results.items() if not ok]


@settings(max_examples=25, deadline=None)
@given(r=st.integers(2, 200))
def test_large_r_sums_are_exact(r):
    assert sum(count_closed("U", r, p, q) for p, q in SECTORS) == 3**r
    assert sum(count_closed("S", r, p, q) for p, q in SECTORS) == 3**r - 1
