"""Parity bookkeeping of the AKLT rotation protocol and the outcome-sequence counts.

A sequence ``(s_1, ..., s_r)`` over ``{0, 1, 2}`` carries the byproduct
``X^f Z^g`` with ``f = xor_i [s_i in {0, 1}]`` and ``g = xor_i [s_i in {1, 2}]``.

* ``U^r_{p,q}``: sequences with ``(f, g) = (p, q)``
* ``S^r_{p,q}``: the same without the all-2 sequence
* ``T^{r,i}_{p,q}``: members of ``S^r_{p,q}`` whose first symbol is ``i``

Closed forms use exact integer arithmetic; the enumeration visits every
sequence and is the oracle for them.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Literal

import numpy as np

from corrspace.utils.config import MAX_COUNT_ENUMERATION_STEPS
from corrspace.utils.errors import CapExceededError

CountKind = Literal["U", "S", "T"]
COUNT_KINDS: tuple[CountKind, ...] = ("U", "S", "T")


def _check_symbols(seq: Sequence[int]) -> None:
    for s in seq:
        if s not in (0, 1, 2):
            raise ValueError(f"invalid symbol {s!r}; expected 0, 1 or 2")


def parity_f(seq: Sequence[int]) -> int:
    """X-parity: each 0 or 1 flips it."""
    _check_symbols(seq)
    return sum(1 for s in seq if s in (0, 1)) % 2


def parity_g(seq: Sequence[int]) -> int:
    """Z-parity: each 1 or 2 flips it."""
    _check_symbols(seq)
    return sum(1 for s in seq if s in (1, 2)) % 2


def h_indicator(p: int, q: int, r: int) -> int:
    """1 iff sector ``(p, q)`` holds the all-2 history after ``r`` steps."""
    if r < 1:
        raise ValueError(f"r must be at least 1, got {r}")
    return int(p == 0 and q == r % 2)


def _sign(r: int) -> int:
    return -1 if r % 2 else 1


def _exact_quarter(numerator: int) -> int:
    quotient, remainder = divmod(numerator, 4)
    if remainder:
        raise ArithmeticError(f"{numerator} is not divisible by 4")
    return quotient


def _u_closed(r: int, p: int, q: int) -> int:
    if (p, q) == (0, 0):
        return _exact_quarter(3**r + 3 * _sign(r))
    return _exact_quarter(3**r - _sign(r))


def _s_closed(r: int, p: int, q: int) -> int:
    # valid from r = 1; the all-2 sequence sits in sector (0, r mod 2)
    if p == 0:
        return _exact_quarter(3**r + _sign(r) - 10) + 2
    return _exact_quarter(3**r - _sign(r) - 8) + 2


def _t_closed(r: int, p: int, q: int, i: int) -> int:
    if i == 0:
        return _u_closed(r - 1, p ^ 1, q)
    if i == 1:
        return _u_closed(r - 1, p ^ 1, q ^ 1)
    return _s_closed(r - 1, p, q ^ 1)


def _check_indices(kind: str, p: int, q: int, i: int | None) -> None:
    if kind not in COUNT_KINDS:
        raise ValueError(f"unknown count kind {kind!r}; expected one of U, S, T")
    if p not in (0, 1) or q not in (0, 1):
        raise ValueError(f"p and q must be bits, got ({p}, {q})")
    if kind == "T" and i not in (0, 1, 2):
        raise ValueError(f"T counts need a first symbol i in 0..2, got {i!r}")


def count_closed(kind: CountKind, r: int, p: int, q: int, i: int | None = None) -> int:
    """Closed-form ``|U^r_{p,q}|``, ``|S^r_{p,q}|`` or ``|T^{r,i}_{p,q}|``.

    Raises:
        ValueError: For unsupported ``r`` (below 1 for U, below 2 for S and T)
    """
    _check_indices(kind, p, q, i)
    min_r = 1 if kind == "U" else 2
    if r < min_r:
        raise ValueError(f"closed form for {kind} needs r >= {min_r}, got {r}")
    if kind == "U":
        return _u_closed(r, p, q)
    if kind == "S":
        return _s_closed(r, p, q)
    assert i is not None
    return _t_closed(r, p, q, i)


@lru_cache(maxsize=None)
def _enumerated_counts(r: int) -> dict[tuple[int, int, int, bool], int]:
    """Count every sequence of length ``r`` by ``(f, g, first symbol, all-2)``."""
    codes = np.arange(3**r, dtype=np.int64)
    f = np.zeros(codes.size, dtype=np.int8)
    g = np.zeros(codes.size, dtype=np.int8)
    for position in range(r):
        symbol = (codes // 3**position) % 3
        f ^= (symbol != 2).astype(np.int8)
        g ^= (symbol != 0).astype(np.int8)
    first = codes % 3
    all_two = codes == 3**r - 1
    keys = ((f * 2 + g) * 3 + first) * 2 + all_two
    tally = np.bincount(keys, minlength=24)
    counts: dict[tuple[int, int, int, bool], int] = {}
    for key, value in enumerate(tally):
        rest, all_two_bit = divmod(key, 2)
        fg, first_symbol = divmod(rest, 3)
        counts[(fg // 2, fg % 2, first_symbol, bool(all_two_bit))] = int(value)
    logging.debug("[Combinat] Enumerated %d sequences of length %d", codes.size, r)
    return counts


def count_enumerate(
    kind: CountKind, r: int, p: int, q: int, i: int | None = None
) -> int:
    """Brute-force count over ``{0,1,2}^r``.

    Raises:
        CapExceededError: If ``r`` exceeds the enumeration cap
    """
    _check_indices(kind, p, q, i)
    if r > MAX_COUNT_ENUMERATION_STEPS:
        raise CapExceededError(
            f"enumeration limited to r <= {MAX_COUNT_ENUMERATION_STEPS}, got {r}"
        )
    if r < 1:
        raise ValueError(f"r must be at least 1, got {r}")
    counts = _enumerated_counts(r)
    total = 0
    for (f, g, first, all_two), value in counts.items():
        if (f, g) != (p, q):
            continue
        if kind != "U" and all_two:
            continue
        if kind == "T" and first != i:
            continue
        total += value
    return total


@dataclass(frozen=True)
class CountTable:
    """All counts of one kind at one ``r``."""

    kind: CountKind
    r: int
    entries: dict[tuple[int, ...], int]
    source: Literal["closed_form", "enumeration"]

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "r": self.r,
            "source": self.source,
            "entries": {",".join(map(str, k)): v for k, v in self.entries.items()},
        }


def table_keys(kind: CountKind) -> list[tuple[int, ...]]:
    sectors = [(p, q) for p in (0, 1) for q in (0, 1)]
    if kind == "T":
        return [(p, q, i) for p, q in sectors for i in range(3)]
    return list(sectors)


def count_table(
    kind: CountKind, r: int, source: Literal["closed_form", "enumeration"]
) -> CountTable:
    counter = count_closed if source == "closed_form" else count_enumerate
    entries = {key: counter(kind, r, *key) for key in table_keys(kind)}
    return CountTable(kind, r, entries, source)


def check_identities(r: int) -> dict[str, bool]:
    """Evaluate the sums, recurrences and first-symbol identities at ``r >= 2``."""
    if r < 2:
        raise ValueError(f"identities are stated for r >= 2, got {r}")
    sectors = [(p, q) for p in (0, 1) for q in (0, 1)]
    u, s, t = _u_closed, _s_closed, _t_closed
    odd = r % 2 == 1
    return {
        "sum_U": sum(u(r, p, q) for p, q in sectors) == 3**r,
        "sum_S": sum(s(r, p, q) for p, q in sectors) == 3**r - 1,
        "sum_T": all(
            sum(t(r, p, q, i) for i in range(3)) == s(r, p, q) for p, q in sectors
        ),
        "recurrence_U": all(
            u(r, p, q)
            == u(r - 1, p ^ 1, q) + u(r - 1, p, q ^ 1) + u(r - 1, p ^ 1, q ^ 1)
            for p, q in sectors
        ),
        "recurrence_S": all(
            s(r, p, q)
            == u(r - 1, p ^ 1, q) + u(r - 1, p ^ 1, q ^ 1) + s(r - 1, p, q ^ 1)
            for p, q in sectors
        ),
        "T0_equals_T1_p0": all(t(r, 0, q, 0) == t(r, 0, q, 1) for q in (0, 1)),
        "T0_minus_T2_p0": all(
            t(r, 0, q, 0) - t(r, 0, q, 2) == (0 if odd else 1) for q in (0, 1)
        ),
        "T1_equals_T2_sector_10": t(r, 1, 0, 1) == t(r, 1, 0, 2),
        "T0_equals_T2_sector_11": t(r, 1, 1, 0) == t(r, 1, 1, 2),
        "T0_minus_T1_sector_11": t(r, 1, 1, 0) - t(r, 1, 1, 1) == -_sign(r - 1),
        "T0_minus_T1_sector_10": t(r, 1, 0, 0) - t(r, 1, 0, 1) == _sign(r - 1),
    }
