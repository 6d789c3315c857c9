"""Integer points on the rank-deficiency variety and the exponents g, gamma.

``count_points`` enumerates every ``(l-1)``-tuple of integer points in the
box ``[-R0, R0]^{n(l-1)}`` and counts those whose difference matrix has rank
below ``r_l``.  ``estimate_g`` turns a series of such counts into a power-law
estimate of ``g_l``; the asymptotic definition only admits an estimate, never
the exact value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

from ._io import write_csv
from ._parallel import ordered_map
from .errors import BudgetError, ShapeError
from .polysys import GradedSystem
from .weyl import entry_polynomials, rank_exact

DEFAULT_BUDGET = 10**8
DEFAULT_R0_VALUES = (16, 32, 64, 128)


@dataclass(frozen=True)
class CountSeries:
    ell: int
    samples: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple((int(a), int(b)) for a, b in self.samples))
        r0s = [r for r, _ in self.samples]
        if any(b <= a for a, b in zip(r0s, r0s[1:])):
            raise ValueError("R0 values must be strictly increasing")
        if any(z < 0 for _, z in self.samples):
            raise ValueError("counts must be non-negative")

    def to_csv(self) -> str:
        return write_csv(["ell", "R0", "z"], [(self.ell, r0, z) for r0, z in self.samples])


@dataclass(frozen=True)
class GEstimate:
    gHat: float
    stderr: float
    exponentFit: float
    flagged: tuple[int, ...] = field(default=())  # R0 values whose zero count was replaced by 1


def _count_chunk(args):
    polys, r_ell, width, R0, first_values = args
    box = range(-R0, R0 + 1)
    count = 0
    single_row = r_ell == 1
    compiled = [[p._sparse_terms() for p in row] for row in polys]

    def value(terms, x):
        total = 0
        for c, factors in terms:
            t = c
            for j, e in factors:
                t *= x[j] ** e
            total += t
        return total

    for head in first_values:
        for tail in itertools.product(box, repeat=width - 1):
            x = (head,) + tail
            if single_row:
                if all(value(t, x) == 0 for t in compiled[0]):
                    count += 1
            else:
                m = [[value(t, x) for t in row] for row in compiled]
                if rank_exact(m) < r_ell:
                    count += 1
    return count


def count_points(s: GradedSystem, ell: int, R0: int, *, budget: int = DEFAULT_BUDGET,
                 workers: int | None = 1) -> int:
    """Number of integer ``(l-1)``-tuples in the box lying on ``M_l``."""
    if not 2 <= ell <= s.d:
        raise ShapeError(f"ell must lie in [2, {s.d}], got {ell}")
    r_ell = s.r(ell)
    if r_ell == 0:
        raise ShapeError(f"block {ell} is empty")
    if R0 < 0:
        raise ValueError("R0 must be non-negative")
    width = s.n * (ell - 1)
    required = (2 * R0 + 1) ** width
    if required > budget:
        raise BudgetError("variety enumeration points", required, budget)
    polys = entry_polynomials(s, ell)
    values = list(range(-R0, R0 + 1))
    # one chunk per leading coordinate value: fixed regardless of worker count
    chunks = [(polys, r_ell, width, R0, (v,)) for v in values]
    return sum(ordered_map(_count_chunk, chunks, workers))


def count_series(s: GradedSystem, ell: int, r0_values: Sequence[int] = DEFAULT_R0_VALUES, *,
                 budget: int = DEFAULT_BUDGET, workers: int | None = 1) -> CountSeries:
    return CountSeries(ell, tuple((r0, count_points(s, ell, r0, budget=budget, workers=workers))
                                  for r0 in r0_values))


def estimate_g(series: CountSeries, n: int, ell: int | None = None) -> GEstimate:
    """Least-squares slope of ``log z`` against ``log R0``; ``g = n(l-1) - slope``."""
    ell = series.ell if ell is None else ell
    if len(series.samples) < 3:
        raise ValueError("estimate_g needs at least 3 samples")
    if any(r0 <= 0 for r0, _ in series.samples):
        raise ValueError("R0 values must be positive for a log fit")
    flagged = tuple(r0 for r0, z in series.samples if z == 0)
    xs = [math.log(r0) for r0, _ in series.samples]
    ys = [math.log(max(z, 1)) for _, z in series.samples]
    k = len(xs)
    mx = math.fsum(xs) / k
    my = math.fsum(ys) / k
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    resid = [y - (intercept + slope * x) for x, y in zip(xs, ys)]
    sse = math.fsum(r * r for r in resid)
    # residuals at rounding level are an exact fit
    scale = math.fsum(y * y for y in ys) + 1.0
    if sse <= (64 * 2.0**-52) ** 2 * scale:
        sse = 0.0
    stderr = math.sqrt(sse / (k - 2) / sxx) if k > 2 else 0.0
    top = n * (ell - 1)
    g = min(max(top - slope, 0.0), float(top))
    return GEstimate(gHat=g, stderr=stderr, exponentFit=slope, flagged=flagged)


def gamma_ell(g_hat: float, ell: int, r_ell: int) -> float:
    """``2^(l-1) (l-1) r_l / g``, with 0 for an empty block and inf for ``g = 0``."""
    if r_ell == 0:
        return 0
    if g_hat < 0:
        raise ValueError("g must be non-negative")
    if g_hat == 0:
        return math.inf
    return 2 ** (ell - 1) * (ell - 1) * r_ell / g_hat


def gamma_prime(gamma: float, ell: int, r_ell: int) -> float:
    if r_ell == 0:
        raise ValueError("gamma' is undefined for an empty block")
    if math.isinf(gamma):
        return math.inf
    return gamma / ((ell - 1) * r_ell)


@dataclass(frozen=True)
class BlockExponents:
    ell: int
    series: CountSeries
    estimate: GEstimate
    gamma: float
    gamma_prime: float


def block_exponents(s: GradedSystem, r0_values: Sequence[int] = DEFAULT_R0_VALUES, *,
                    budget: int = DEFAULT_BUDGET, workers: int | None = 1) -> list[BlockExponents]:
    """Count series, g estimate and gamma for every nonempty block of degree >= 2."""
    out = []
    for ell in range(2, s.d + 1):
        r = s.r(ell)
        if r == 0:
            continue
        series = count_series(s, ell, r0_values, budget=budget, workers=workers)
        est = estimate_g(series, s.n, ell)
        gam = gamma_ell(est.gHat, ell, r)
        out.append(BlockExponents(ell, series, est, gam, gamma_prime(gam, ell, r)))
    return out
