"""Simultaneous rational approximation and major/minor arc membership.

All distances are computed exactly: frequencies are held as
:class:`fractions.Fraction` (a float converts exactly), so ``||q alpha||`` is
exact and only the comparison thresholds such as ``P^(D - l)`` are floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import BudgetError
from .expsum import AlphaVector, as_fraction

DEFAULT_Q_BUDGET = 10**7


def nearest_int(x: Fraction) -> int:
    """Nearest integer, halves rounded away from zero."""
    fl = math.floor(x)
    frac = x - fl
    if frac > Fraction(1, 2) or (frac == Fraction(1, 2) and x > 0):
        return fl + 1
    return fl


def dist_to_int(x) -> Fraction:
    x = as_fraction(x)
    return abs(x - nearest_int(x))


@dataclass(frozen=True)
class SimultaneousWitness:
    q: int
    errors: tuple[Fraction | None, ...]  # max ||q alpha_l|| per block, None for empty blocks
    bounds: tuple[bool, ...]


def _q_limit(P: float, exponent: float) -> int:
    x = P ** exponent
    k = math.floor(x)
    # 1000 ** (1/3) evaluates to 9.999...; treat such values as the integer
    if math.isclose(x, k + 1, rel_tol=1e-12):
        k += 1
    return k


def find_simultaneous(alpha: AlphaVector, P: float, delta: float, *,
                      budget: int = DEFAULT_Q_BUDGET) -> SimultaneousWitness | None:
    """Smallest ``q <= P^D`` with ``||q alpha_l|| <= P^(D - l)`` for every nonempty block."""
    if P <= 1:
        raise ValueError("P must exceed 1")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    qmax = _q_limit(P, delta)
    if qmax > budget:
        raise BudgetError("simultaneous approximation q-scan", qmax, budget)
    blocks = alpha.blocks
    limits = [P ** (delta - ell) for ell in range(1, len(blocks) + 1)]
    for q in range(1, qmax + 1):
        errs = []
        ok = True
        for block, lim in zip(blocks, limits):
            if not block:
                errs.append(None)
                continue
            e = max(dist_to_int(q * a) for a in block)
            errs.append(e)
            if e > lim:
                ok = False
                break
        if ok:
            return SimultaneousWitness(q, tuple(errs), tuple(True for _ in blocks))
    return None


@dataclass(frozen=True)
class ArcVerdict:
    major: bool
    a: tuple[int, ...] | None = None
    q: int | None = None
    distance: Fraction | None = None
    radius: float = 0.0


def _nearest_low(x: Fraction) -> int:
    # nearest integer; at an exact half the smaller one (lexicographic tie-break)
    return math.ceil(x - Fraction(1, 2))


def arc_membership_linear(alpha1: Sequence, C: float, P: float, *,
                          budget: int = DEFAULT_Q_BUDGET) -> ArcVerdict:
    """Whether ``alpha1`` lies in the major arcs ``M(C)``.

    Scans ``q = 1, 2, ...`` up to ``P^C`` and returns the first ``(a, q)`` with
    ``max_r |alpha_r - a_r / q| <= P^(C - 1)``, reduced to lowest terms.
    """
    if not alpha1:
        raise ValueError("need at least one coordinate")
    if P <= 1 or C <= 0:
        raise ValueError("need P > 1 and C > 0")
    alpha1 = [as_fraction(a) for a in alpha1]
    qmax = _q_limit(P, C)
    if qmax > budget:
        raise BudgetError("major arc q-scan", qmax, budget)
    radius = P ** (C - 1)
    for q in range(1, qmax + 1):
        a = [_nearest_low(q * x) for x in alpha1]
        dist = max(abs(x - Fraction(ar, q)) for x, ar in zip(alpha1, a))
        if dist <= radius:
            g = math.gcd(q, *a)
            return ArcVerdict(True, tuple(ar // g for ar in a), q // g, dist, radius)
    return ArcVerdict(False, radius=radius)


def best_rational(alpha, qmax: int) -> tuple[int, int, Fraction]:
    """Closest fraction ``a/q`` with ``q <= qmax``, and its exact error."""
    if qmax < 1:
        raise ValueError("qmax must be at least 1")
    x = as_fraction(alpha)
    best = x.limit_denominator(qmax)
    return best.numerator, best.denominator, abs(x - best)
