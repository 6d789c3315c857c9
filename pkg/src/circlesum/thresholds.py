"""Explicit constants of the main exponential sum estimate and an empirical
check of its dichotomy.

Every formula accepts ``int``/``Fraction`` inputs and then stays exact;
``math.inf`` stands for an infinite gamma sum.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ._io import write_csv
from ._parallel import ordered_map
from .dioph import DEFAULT_Q_BUDGET, SimultaneousWitness, find_simultaneous
from .errors import BudgetError
from .expsum import DEFAULT_LATTICE_BUDGET, AlphaVector, BoxSpec, eval_S
from .linforms import LinearBlock, b1
from .polysys import GradedSystem
from .variety import DEFAULT_R0_VALUES, BlockExponents, block_exponents

INF = math.inf

ALT_I = "ALT_I"
ALT_II = "ALT_II"
BOTH = "BOTH"
VIOLATION = "VIOLATION"
CLASSES = (ALT_I, ALT_II, BOTH, VIOLATION)


def _exact(x):
    if isinstance(x, float) and math.isfinite(x):
        return x
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return x


def _inv(x):
    if x == 0:
        return INF
    if x == INF:
        return 0
    return 1 / x


def gamma_sum(gammas: dict[int, float]) -> float:
    """``sum_{j >= 2} 4^(j-2) gamma_j``; missing degrees count as 0."""
    total = 0
    for j, g in gammas.items():
        if j < 2:
            continue
        if g == INF:
            return INF
        total = total + 4 ** (j - 2) * _exact(g)
    return total


def omega_sup(gs, r1: int, R: int):
    """Supremum of the admissible saving exponent Omega."""
    gs = _exact(gs)
    first = _inv(gs) / (8 * r1 + 9) if gs != 0 else INF
    second = _inv(Fraction(1, 2 * (R + 1)) + gs)
    return min(first, second)


def b1_required(gs, r1: int, R: int):
    """The lower bound B1 must strictly exceed."""
    if r1 == 0:
        return 0
    gs = _exact(gs)
    return 2 * r1 * _inv(max(4 * (r1 + 1) * gs, Fraction(1, 4 * (R + 1))))


def m_zero(gs, r1: int, R: int):
    gs = _exact(gs)
    if gs == INF:
        return INF
    return max(8 * (r1 + 1) * gs, Fraction(1, 2 * (R + 1)))


@dataclass(frozen=True)
class ThresholdReport:
    gammaSum: float
    M0: float
    b1Required: float
    omegaSup: float
    b1Observed: float
    feasible: bool
    blocks: tuple[BlockExponents, ...] = field(default=(), compare=False)

    def rows(self):
        yield "gammaSum", self.gammaSum
        yield "M0", self.M0
        yield "b1Required", self.b1Required
        yield "omegaSup", self.omegaSup
        yield "b1Observed", self.b1Observed
        yield "feasible", self.feasible
        for b in self.blocks:
            yield f"gHat_{b.ell}", b.estimate.gHat
            yield f"gStderr_{b.ell}", b.estimate.stderr
            yield f"gamma_{b.ell}", b.gamma
            yield f"gammaPrime_{b.ell}", b.gamma_prime


def threshold_report(gs, r1: int, R: int, b1_observed, blocks=()) -> ThresholdReport:
    m0 = m_zero(gs, r1, R)
    req = b1_required(gs, r1, R)
    om = omega_sup(gs, r1, R)
    finite = all(math.isfinite(v) for v in (gs, m0, req, om))
    feasible = finite and b1_observed > req and om > 0
    return ThresholdReport(gs, m0, req, om, b1_observed, feasible, tuple(blocks))


def system_thresholds(s: GradedSystem, r0_values: Sequence[int] = DEFAULT_R0_VALUES, *,
                      budget: int = 10**8, workers: int | None = 1) -> ThresholdReport:
    """Measure every gamma and B1 of ``s`` and evaluate the thresholds."""
    s.require_valid()
    blocks = block_exponents(s, r0_values, budget=budget, workers=workers)
    gs = gamma_sum({b.ell: b.gamma for b in blocks})
    observed = b1(LinearBlock.from_system(s))
    return threshold_report(gs, s.r(1), s.R, observed, blocks)


# -- dichotomy ------------------------------------------------------------------

@dataclass(frozen=True)
class DichotomyVerdict:
    alpha: AlphaVector
    sumMagnitude: float
    boundI: float
    witness: SimultaneousWitness | None
    classification: str


@dataclass(frozen=True)
class GridError:
    alpha: AlphaVector
    message: str


def classify(magnitude: float, bound: float, witness) -> str:
    small = magnitude <= bound
    if witness is None:
        return ALT_I if small else VIOLATION
    return BOTH if small else ALT_II


@dataclass
class DichotomyResult:
    entries: list
    P: float
    delta: float
    omega: float
    slack: float
    gammaSum: float
    omegaSup: float
    warnings: list[str]

    @property
    def verdicts(self) -> list[DichotomyVerdict]:
        return [e for e in self.entries if isinstance(e, DichotomyVerdict)]

    @property
    def errors(self) -> list[GridError]:
        return [e for e in self.entries if isinstance(e, GridError)]

    def counts(self) -> dict[str, int]:
        out = {c: 0 for c in CLASSES}
        for v in self.verdicts:
            out[v.classification] += 1
        out["ERROR"] = len(self.errors)
        return out

    def violations(self) -> list[DichotomyVerdict]:
        return [v for v in self.verdicts if v.classification == VIOLATION]

    def summary(self) -> dict:
        return {
            "P": self.P, "delta": self.delta, "omega": self.omega, "slack": self.slack,
            "gammaSum": self.gammaSum, "omegaSup": self.omegaSup,
            "counts": self.counts(),
            "violations": [[str(a) for a in v.alpha.flat()] for v in self.violations()],
            "warnings": list(self.warnings),
        }

    def to_csv(self) -> str:
        return dichotomy_csv(self)


def _alpha_label(shape):
    return [f"alpha_{ell}_{r}" for ell, size in enumerate(shape, start=1) for r in range(1, size + 1)]


def dichotomy_csv(result: DichotomyResult) -> str:
    shape = result.entries[0].alpha.shape if result.entries else ()
    rows = []
    for e in result.entries:
        alpha = list(e.alpha.flat())
        if isinstance(e, GridError):
            rows.append(alpha + ["", "", "", "ERROR"])
        else:
            q = "" if e.witness is None else e.witness.q
            rows.append(alpha + [e.sumMagnitude, e.boundI, q, e.classification])
    return write_csv(_alpha_label(shape) + ["abs_S", "boundI", "q", "classification"], rows)


def _verdict_task(args):
    s, P, delta, bound, alpha, lattice_budget, q_budget = args
    try:
        mag = abs(eval_S(s, BoxSpec(P, s.n), alpha, budget=lattice_budget, workers=1))
        wit = find_simultaneous(alpha, P, delta, budget=q_budget)
    except BudgetError as exc:
        return GridError(alpha, str(exc))
    return DichotomyVerdict(alpha, mag, bound, wit, classify(mag, bound, wit))


def verify_dichotomy(s: GradedSystem, P: float, delta: float, omega: float,
                     grid: Sequence[AlphaVector], *, gamma_sum_value=None,
                     r0_values: Sequence[int] = DEFAULT_R0_VALUES, slack: float = 1.0,
                     lattice_budget: int = DEFAULT_LATTICE_BUDGET,
                     q_budget: int = DEFAULT_Q_BUDGET,
                     workers: int | None = 1) -> DichotomyResult:
    """Classify each grid point as alternative (i), (ii), both, or a violation.

    The sum bound is ``slack * P^(n - delta * omega)``.  ``gamma_sum_value``
    defaults to the measured gamma sum of ``s``.
    """
    s.require_valid()
    if not grid:
        raise ValueError("grid must be nonempty")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    for a in grid:
        a.check(s)
    if gamma_sum_value is None:
        blocks = block_exponents(s, r0_values, workers=workers)
        gamma_sum_value = gamma_sum({b.ell: b.gamma for b in blocks})
    sup = omega_sup(gamma_sum_value, s.r(1), s.R)
    notes = []
    if not 0 < omega < sup:
        msg = f"omega={omega} is outside the admissible range (0, {float(sup)})"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    bound = slack * P ** (s.n - delta * omega)
    tasks = [(s, P, delta, bound, a, lattice_budget, q_budget) for a in grid]
    entries = ordered_map(_verdict_task, tasks, workers)
    return DichotomyResult(entries, P, delta, omega, slack, gamma_sum_value, sup, notes)
