"""Elimination decoding and the disjunct / separable predicates.

The elimination decoder starts from all items and strikes every member
of a negative test.  It recovers the defective set exactly when the
matrix is disjunct with respect to that set: each non-defective item
then sits in some test that contains no defective (a "good row"), and
that test's negative answer eliminates it.
"""

from __future__ import annotations

import math
from itertools import combinations

from .errors import DimensionError, SizeGuardError
from .matrices import AnswerVector, BitMatrix, DefectiveSet, _item_mask, or_columns

__all__ = [
    "decode_eliminate",
    "is_disjunct",
    "is_separable",
    "good_row_count",
    "SEPARABILITY_BUDGET",
]

# Upper bound on the number of candidate sets is_separable may enumerate.
SEPARABILITY_BUDGET = 10_000_000


def decode_eliminate(matrix: BitMatrix, answers: AnswerVector) -> set:
    """Candidate set left after striking all members of negative tests."""
    if answers.m != matrix.m:
        raise DimensionError(
            f"answer vector has {answers.m} entries for a {matrix.m}-row matrix")
    eliminated = 0
    abits, m = answers.bits, matrix.m
    for t, w in enumerate(matrix.rows):
        if not (abits >> (m - 1 - t)) & 1:
            eliminated |= w
    n = matrix.n
    survivors = ~eliminated & matrix.full_row_mask
    return {n - j for j in _bit_positions(survivors)}


def _bit_positions(word: int):
    """0-based positions of set bits, from the low end."""
    while word:
        low = word & -word
        yield low.bit_length() - 1
        word ^= low


def good_row_count(matrix: BitMatrix, defectives) -> int:
    """Number of tests containing no defective item."""
    mask = _item_mask(matrix, defectives)
    return sum(1 for w in matrix.rows if not w & mask)


def is_disjunct(matrix: BitMatrix, defectives) -> bool:
    """True iff every non-defective item appears in some good row.

    Equivalent to: elimination decoding of this set's answer vector
    returns exactly the set.
    """
    mask = _item_mask(matrix, defectives)
    covered = 0
    for w in matrix.rows:
        if not w & mask:
            covered |= w
    return (covered | mask) == matrix.full_row_mask


def is_separable(matrix: BitMatrix, defectives, d: int) -> bool:
    """True iff no other candidate set of size <= d gives the same answers.

    Exhaustive over all subsets of the items, smallest first; refuses to
    run when the candidate count exceeds SEPARABILITY_BUDGET.
    """
    n = matrix.n
    d = int(d)
    if d < 0:
        d = 0
    total = sum(math.comb(n, k) for k in range(0, min(d, n) + 1))
    if total > SEPARABILITY_BUDGET:
        raise SizeGuardError(
            f"{total} candidate sets exceed the budget of {SEPARABILITY_BUDGET}")
    target_items = tuple(DefectiveSet(defectives).items)
    target = or_columns(matrix, target_items).bits
    cols = matrix.column_words()
    for k in range(0, min(d, n) + 1):
        for combo in combinations(range(1, n + 1), k):
            if combo == target_items:
                continue
            acc = 0
            for i in combo:
                acc |= cols[i - 1]
            if acc == target:
                return False
    return True
