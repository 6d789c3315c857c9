"""Weyl differencing and the rank-deficiency matrix.

``gamma_eval(G, l, pts)`` is the alternating sum

    sum over t in {0,1}^l of (-1)^(t_1+...+t_l) G(t_1 x_1 + ... + t_l x_l),

which is symmetric in its arguments, vanishes when any argument is zero and
is identically zero once ``l`` exceeds the degree of a form ``G``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .errors import BudgetError, ShapeError
from .polysys import GradedSystem, Polynomial, evaluate

SYMBOLIC_VARIABLE_BUDGET = 16


def gamma_eval(G: Polynomial, ell: int, pts: Sequence[Sequence[int]]) -> int:
    if ell < 1:
        raise ValueError("ell must be positive")
    if len(pts) != ell:
        raise ShapeError(f"need {ell} points, got {len(pts)}")
    n = G.n
    for p in pts:
        if len(p) != n:
            raise ShapeError(f"point {tuple(p)} does not have {n} coordinates")
    total = 0
    for t in itertools.product((0, 1), repeat=ell):
        x = [0] * n
        for tk, p in zip(t, pts):
            if tk:
                for j in range(n):
                    x[j] += p[j]
        v = evaluate(G, x)
        total += -v if sum(t) & 1 else v
    return total


def _difference_polynomial(G: Polynomial, ell: int) -> Polynomial:
    # Expand G(x_1 + ... + x_l) once.  A monomial touching exactly the point
    # blocks B appears in G(sum_{k in S} x_k) iff B is a subset of S, and
    # sum_{S >= B} (-1)^|S| vanishes unless B is every block.
    n = G.n
    m = ell * n
    total = [sum((Polynomial.variable(m, k * n + j + 1) for k in range(ell)), Polynomial.zero(m))
             for j in range(n)]
    sign = -1 if ell & 1 else 1
    acc = {}
    for mono in G.compose(total).terms:
        e = mono.exponents
        if all(any(e[k * n:(k + 1) * n]) for k in range(ell)):
            acc[e] = sign * mono.coefficient
    return Polynomial(m, acc)


def gamma_symbolic(G: Polynomial, ell: int, budget: int = SYMBOLIC_VARIABLE_BUDGET) -> Polynomial:
    """Expansion of the differenced polynomial in the ``l*n`` variables.

    Variable ``x_{k,j}`` (point ``k``, coordinate ``j``, both 1-based) is
    variable number ``(k - 1) * n + j`` of the result.
    """
    if ell < 1:
        raise ValueError("ell must be positive")
    if ell * G.n > budget:
        raise BudgetError("symbolic differencing variables", ell * G.n, budget)
    return _difference_polynomial(G, ell)


def unit_vector(n: int, i: int) -> tuple[int, ...]:
    return tuple(1 if j == i else 0 for j in range(n))


@dataclass(frozen=True)
class DiffMatrix:
    """Rows indexed by the forms ``U_{l,r}``, columns by directions ``e_i``."""

    entries: tuple[tuple[int, ...], ...]
    ell: int
    points: tuple[tuple[int, ...], ...]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), (len(self.entries[0]) if self.entries else 0)

    def rank(self) -> int:
        return rank_exact(self.entries)


def m_matrix(s: GradedSystem, ell: int, pts: Sequence[Sequence[int]]) -> DiffMatrix:
    if not 2 <= ell <= s.d:
        raise ShapeError(f"ell must lie in [2, {s.d}], got {ell}")
    if s.r(ell) == 0:
        raise ShapeError(f"block {ell} is empty")
    if len(pts) != ell - 1:
        raise ShapeError(f"need {ell - 1} points, got {len(pts)}")
    pts = tuple(tuple(p) for p in pts)
    n = s.n
    rows = tuple(
        tuple(gamma_eval(U, ell, pts + (unit_vector(n, i),)) for i in range(n))
        for U in s.forms(ell)
    )
    return DiffMatrix(rows, ell, pts)


def entry_polynomials(s: GradedSystem, ell: int) -> list[list[Polynomial]]:
    """``E[r][i]`` as a polynomial in the ``n(l-1)`` coordinates of the points.

    ``E[r][i](x_1, ..., x_{l-1})`` equals entry ``(r, i)`` of
    :func:`m_matrix`; evaluating these is much cheaper than repeated
    differencing when many points are needed.
    """
    n = s.n
    out = []
    for U in s.forms(ell):
        full = _difference_polynomial(U, ell)
        last = range((ell - 1) * n, ell * n)
        row = []
        for i in range(n):
            row.append(full.substitute({j: int(j - (ell - 1) * n == i) for j in last}))
        out.append(row)
    return out


def rank_exact(m: Sequence[Sequence[int]]) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination."""
    a = [list(row) for row in m]
    if not a or not a[0]:
        return 0
    rows, cols = len(a), len(a[0])
    rank = 0
    prev = 1
    for c in range(cols):
        pivot = next((i for i in range(rank, rows) if a[i][c]), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        p = a[rank][c]
        for i in range(rank + 1, rows):
            f = a[i][c]
            row_i, row_r = a[i], a[rank]
            for j in range(c + 1, cols):
                row_i[j] = (p * row_i[j] - f * row_r[j]) // prev
            row_i[c] = 0
        prev = p
        rank += 1
        if rank == rows:
            break
    return rank
