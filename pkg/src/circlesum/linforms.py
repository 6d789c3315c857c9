"""The linear-block invariant B1: fewest nonzero coefficients in a nontrivial
rational combination of the linear forms ``U_{1,1}, ..., U_{1,r_1}``.

A nonzero ``lambda`` with ``lambda^T M`` supported inside a column set ``T``
exists exactly when the columns outside ``T`` have rank below ``r_1``, so B1
is found by testing support sets in order of increasing size.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import BudgetError, ShapeError
from .polysys import GradedSystem, Polynomial
from .weyl import rank_exact

MAX_COLUMNS = 20


@dataclass(frozen=True)
class LinearBlock:
    """``M[r][j]`` is the coefficient of ``x_{j+1}`` in ``U_{1,r+1}``."""

    M: tuple[tuple[int, ...], ...]
    n: int

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.M)
        if any(len(row) != self.n for row in rows):
            raise ShapeError(f"every row must have {self.n} entries")
        object.__setattr__(self, "M", rows)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], n: int | None = None) -> LinearBlock:
        rows = [list(r) for r in rows]
        if n is None:
            n = len(rows[0]) if rows else 0
        return cls(tuple(map(tuple, rows)), n)

    @classmethod
    def from_forms(cls, forms: Sequence[Polynomial], n: int) -> LinearBlock:
        rows = []
        for U in forms:
            if U.n != n:
                raise ShapeError("form has the wrong variable count")
            if U.degree > 1 or U.coefficient((0,) * n):
                raise ShapeError(f"{U} is not a linear form")
            rows.append(tuple(U.coefficient(tuple(int(k == j) for k in range(n))) for j in range(n)))
        return cls(tuple(rows), n)

    @classmethod
    def from_system(cls, s: GradedSystem) -> LinearBlock:
        return cls.from_forms(s.forms(1), s.n)

    @property
    def r(self) -> int:
        return len(self.M)


def b1_support(block: LinearBlock, max_columns: int = MAX_COLUMNS) -> tuple[int, ...] | None:
    """Lexicographically first minimal support set, or ``None`` when ``r_1 = 0``."""
    r1, n = block.r, block.n
    if r1 == 0:
        return None
    if n > max_columns:
        raise BudgetError("B1 subset search columns", n, max_columns)
    cols = range(n)
    for k in range(n + 1):
        for T in itertools.combinations(cols, k):
            keep = [j for j in cols if j not in T]
            sub = [[row[j] for j in keep] for row in block.M]
            if rank_exact(sub) < r1:
                return T
    raise AssertionError("unreachable: the empty column set always has rank 0")


def b1(block: LinearBlock, max_columns: int = MAX_COLUMNS) -> float:
    """B1 of the block; ``math.inf`` when it has no rows."""
    T = b1_support(block, max_columns)
    return math.inf if T is None else len(T)


def restrict(block: LinearBlock, j: int) -> LinearBlock:
    """Set ``x_j = 0`` (1-based) by zeroing column ``j``."""
    if not 1 <= j <= block.n:
        raise ShapeError(f"variable index {j} outside 1..{block.n}")
    rows = tuple(tuple(0 if k == j - 1 else v for k, v in enumerate(row)) for row in block.M)
    return LinearBlock(rows, block.n)


def restriction_gap(block: LinearBlock, j: int) -> int:
    if block.r == 0:
        raise ValueError("restriction gap needs at least one form")
    return b1(restrict(block, j)) - b1(block)
