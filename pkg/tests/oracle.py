"""Independent oracles used to freeze expected values.

Kept deliberately separate from the package: a full-matrix edit-distance
dynamic program and a Decimal-based similarity ratio, implemented before
and without reference to the production code paths they check.
"""
from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal


def edit_distance(a: str, b: str) -> int:
    """Classic full-matrix Wagner-Fischer dynamic program."""
    rows, cols = len(a) + 1, len(b) + 1
    d = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        d[i][0] = i
    for j in range(cols):
        d[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
    return d[-1][-1]


def similarity_score(a: str, b: str) -> int:
    """Normalized ratio on 0..100, rounded half-up via Decimal."""
    m = max(len(a), len(b))
    if m == 0:
        return 100
    ratio = Decimal(100) * (Decimal(1) - Decimal(edit_distance(a, b)) / Decimal(m))
    return int(ratio.quantize(Decimal("1"), rounding=ROUND_HALF_UP))
