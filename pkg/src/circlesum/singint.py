"""The singular integral over the unit cube and its decay along rays.

The integrand ``e(sum tau_{l,r} U_{l,r}(v))`` uses the top-degree forms.  The
phase is split into groups of variables that never share a monomial; the
integral is then exactly the product of the group integrals, each computed by
adaptive tensor Gauss-Legendre cubature on a grid fine enough to resolve the
oscillation (at least four cells per unit of phase derivative).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._io import write_csv
from .errors import BudgetError, ShapeError
from .polysys import GradedSystem

GAUSS_ORDER = 6
MAX_GROUP_DIM = 4
DEFAULT_CELL_BUDGET = 2_000_000
MAX_ROUNDS = 40


@dataclass(frozen=True)
class TauVector:
    """Real parameters grouped like the frequencies: ``blocks[l - 1]``."""

    blocks: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(tuple(float(t) for t in b) for b in self.blocks))

    @classmethod
    def from_flat(cls, shape: Sequence[int], values: Sequence[float]) -> TauVector:
        values = list(values)
        if len(values) != sum(shape):
            raise ShapeError(f"{len(values)} values for shape {tuple(shape)}")
        out, k = [], 0
        for r in shape:
            out.append(tuple(values[k:k + r]))
            k += r
        return cls(tuple(out))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def flat(self) -> tuple[float, ...]:
        return tuple(t for b in self.blocks for t in b)

    def norm(self) -> float:
        return max((abs(t) for t in self.flat()), default=0.0)

    def scaled(self, t: float) -> TauVector:
        return TauVector(tuple(tuple(t * x for x in b) for b in self.blocks))

    def __neg__(self):
        return self.scaled(-1.0)


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    errEstimate: float
    converged: bool
    cells: int

    def __iter__(self):
        return iter((self.value, self.errEstimate))


def phase_terms(s: GradedSystem, tau: TauVector) -> dict[tuple[int, ...], float]:
    """Real coefficients of ``sum tau_{l,r} U_{l,r}`` keyed by exponent tuple."""
    if tau.shape != s.block_sizes:
        raise ShapeError(f"tau shape {tau.shape} does not match system {s.block_sizes}")
    acc: dict[tuple[int, ...], float] = {}
    forms = [U for ell in range(1, s.d + 1) for U in s.forms(ell)]
    for U, t in zip(forms, tau.flat()):
        if t == 0:
            continue
        for m in U.terms:
            acc[m.exponents] = acc.get(m.exponents, 0.0) + t * m.coefficient
    return {e: c for e, c in acc.items() if c != 0}


def variable_groups(terms: dict[tuple[int, ...], float], n: int) -> list[list[int]]:
    """Connected components of the "share a monomial" relation on variables."""
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for e in terms:
        used = [j for j, k in enumerate(e) if k]
        for j in used[1:]:
            parent[find(j)] = find(used[0])
    groups: dict[int, list[int]] = {}
    for j in range(n):
        groups.setdefault(find(j), []).append(j)
    return sorted(groups.values())


class _Phase:
    def __init__(self, terms, variables):
        self.vars = list(variables)
        self.coef = np.array([c for c in terms.values()], dtype=float)
        self.exps = np.array([[e[j] for j in self.vars] for e in terms], dtype=int).reshape(
            len(terms), len(self.vars))

    def __call__(self, pts):
        out = np.zeros(pts.shape[0])
        for c, e in zip(self.coef, self.exps):
            t = np.full(pts.shape[0], c)
            for col, k in enumerate(e):
                if k:
                    t = t * pts[:, col] ** k
            out += t
        return out

    def slope_bounds(self):
        """Upper bounds for ``|d phase / d v_j|`` on the unit cube."""
        k = len(self.vars)
        return [float(sum(abs(c) * e[j] for c, e in zip(self.coef, self.exps))) for j in range(k)]


def _rule(order, k):
    x, w = np.polynomial.legendre.leggauss(order)
    x = (x + 1) / 2
    w = w / 2
    nodes = np.array(list(itertools.product(x, repeat=k))).reshape(-1, k)
    weights = np.prod(np.array(list(itertools.product(w, repeat=k))).reshape(-1, k), axis=1)
    return nodes, weights


def _cells_quad(phase, lo, width, nodes, weights, chunk=1 << 18):
    out = np.empty(len(lo), dtype=complex)
    per = max(1, chunk // len(nodes))
    vol = np.prod(width, axis=1)
    for a in range(0, len(lo), per):
        b = min(a + per, len(lo))
        pts = lo[a:b, None, :] + width[a:b, None, :] * nodes[None, :, :]
        ph = phase(pts.reshape(-1, lo.shape[1])).reshape(b - a, -1)
        ph = ph - np.round(ph)
        vals = np.exp(2j * np.pi * ph)
        out[a:b] = (vals @ weights) * vol[a:b]
    return out


def _split(lo, width):
    k = lo.shape[1]
    offsets = np.array(list(itertools.product((0.0, 0.5), repeat=k)))
    clo = (lo[:, None, :] + offsets[None, :, :] * width[:, None, :]).reshape(-1, k)
    cw = np.repeat(width / 2, len(offsets), axis=0)
    return clo, cw


def _integrate_group(phase: _Phase, scale: float, tol: float, budget: int):
    k = len(phase.vars)
    slopes = phase.slope_bounds()
    per_axis = [math.ceil(4 * (1 + max(scale, L))) for L in slopes]
    ncells = math.prod(per_axis)
    children = 2 ** k
    if ncells * (1 + children) > budget:
        raise BudgetError("singular integral cells", ncells * (1 + children), budget)
    axes = [np.arange(m) / m for m in per_axis]
    lo = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, k)
    width = np.tile(np.array([1.0 / m for m in per_axis]), (len(lo), 1))
    nodes, weights = _rule(GAUSS_ORDER, k)

    def evaluate(lo, width):
        parent = _cells_quad(phase, lo, width, nodes, weights)
        clo, cw = _split(lo, width)
        kids = _cells_quad(phase, clo, cw, nodes, weights).reshape(len(lo), children)
        # value: refined sum; error: disagreement with the coarse rule
        return kids.sum(axis=1), np.abs(parent - kids.sum(axis=1))

    vals, errs = evaluate(lo, width)
    used = len(lo) * (1 + children)
    converged = False
    for _ in range(MAX_ROUNDS):
        total_err = float(math.fsum(errs))
        if total_err <= tol:
            converged = True
            break
        # refine the cells carrying the largest errors (stable: index order on ties)
        order = np.argsort(-errs, kind="stable")
        cum = np.cumsum(errs[order])
        need = int(np.searchsorted(cum, total_err - tol / 2, side="left")) + 1
        pick = np.sort(order[:need])
        cost = len(pick) * children * (1 + children)
        if used + cost > budget:
            break
        keep = np.ones(len(lo), dtype=bool)
        keep[pick] = False
        nlo, nw = _split(lo[pick], width[pick])
        nv, ne = evaluate(nlo, nw)
        used += cost
        lo = np.concatenate([lo[keep], nlo])
        width = np.concatenate([width[keep], nw])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
    value = complex(math.fsum(vals.real), math.fsum(vals.imag))
    return value, float(math.fsum(errs)), converged, len(lo)


def eval_I(s: GradedSystem, tau: TauVector, tol: float = 1e-9, *,
           factorize: bool = True, cell_budget: int = DEFAULT_CELL_BUDGET) -> IntegralResult:
    """``integral over [0,1]^n of e(sum tau_{l,r} U_{l,r}(v)) dv``."""
    if tol < 1e-10:
        raise ValueError("tol must be at least 1e-10")
    terms = phase_terms(s, tau)
    if not terms:
        return IntegralResult(1 + 0j, 0.0, True, 0)
    scale = tau.norm()
    if factorize:
        groups = [g for g in variable_groups(terms, s.n)
                  if any(any(e[j] for j in g) for e in terms)]
    else:
        groups = [[j for j in range(s.n) if any(e[j] for e in terms)]]
    for g in groups:
        if len(g) > MAX_GROUP_DIM:
            raise ShapeError(f"coupled variable group of size {len(g)} exceeds {MAX_GROUP_DIM}")
    share = tol / max(1, len(groups))
    value, err, ok, cells = 1 + 0j, 0.0, True, 0
    for g in groups:
        sub = {e: c for e, c in terms.items() if any(e[j] for j in g)}
        v, e, conv, c = _integrate_group(_Phase(sub, g), scale, share, cell_budget)
        # |(a + da)(b + db) - ab| <= |da| (|b| + |db|) + |a| |db|
        err = err * (abs(v) + e) + abs(value) * e
        value *= v
        ok = ok and conv
        cells += c
    return IntegralResult(value, err, ok and err <= tol, cells)


@dataclass(frozen=True)
class DecayRow:
    t: float
    value: complex
    err: float
    bound: float
    within: bool
    used: bool


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    C: float
    rows: tuple[DecayRow, ...] = field(default=())

    @property
    def envelope_holds(self) -> bool:
        return all(r.within for r in self.rows if r.used)

    def to_csv(self) -> str:
        return write_csv(["t", "re", "im", "abs", "bound"],
                         [(r.t, r.value.real, r.value.imag, abs(r.value), r.bound) for r in self.rows])


def decay_exponent(s: GradedSystem, direction: TauVector, t_values: Sequence[float],
                   tol: float = 1e-9, **kw) -> DecayFit:
    """Fit ``log |I(t * direction)|`` against ``log t`` and compare with
    ``C min(1, t^(-R-1))`` for the fitted constant ``C``.
    """
    t_values = [float(t) for t in t_values]
    if len(t_values) < 4 or any(t <= 0 for t in t_values):
        raise ValueError("need at least 4 positive t values")
    if any(b <= a for a, b in zip(t_values, t_values[1:])):
        raise ValueError("t values must be increasing")
    if t_values[-1] / t_values[0] < 100:
        raise ValueError("t values must span at least two decades")
    if not math.isclose(direction.norm(), 1.0, rel_tol=1e-12):
        raise ValueError("direction must have unit sup-norm")
    results = [eval_I(s, direction.scaled(t), tol, **kw) for t in t_values]
    usable = [abs(r.value) > max(10 * r.errEstimate, 1e-300) for r in results]
    xs = [math.log(t) for t, u in zip(t_values, usable) if u]
    ys = [math.log(abs(r.value)) for r, u in zip(results, usable) if u]
    if len(xs) < 3:
        raise ValueError("too few nonzero integral values for a fit")
    k = len(xs)
    mx, my = math.fsum(xs) / k, math.fsum(ys) / k
    slope = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys)) / math.fsum((x - mx) ** 2 for x in xs)
    C = math.exp(my - slope * mx)
    R = s.R
    rows = []
    for t, r, u in zip(t_values, results, usable):
        bound = C * min(1.0, t ** (-R - 1))
        rows.append(DecayRow(t, r.value, r.errEstimate, bound,
                             abs(r.value) <= bound * (1 + 1e-9) + r.errEstimate, u))
    return DecayFit(slope, C, tuple(rows))
