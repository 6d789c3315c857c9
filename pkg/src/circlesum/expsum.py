"""The exponential sum S(alpha) over the lattice box [0, P]^n and the
multidimensional partial summation identity.

Phases are exact: every frequency is a rational number (floats convert
exactly), so for a common denominator ``D`` the phase at ``x`` is the
integer ``Phi(x) mod D`` of an integer polynomial ``Phi``.  Only the final
``cos``/``sin`` of ``2 pi (Phi(x) mod D) / D`` is rounded.  Each fixed chunk
of lattice points is summed with ``math.fsum`` and the chunk totals are
combined with ``math.fsum`` in chunk order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ._parallel import ordered_map, split_range
from .errors import BudgetError, QuadratureError, ShapeError
from .polysys import GradedSystem, Polynomial

DEFAULT_LATTICE_BUDGET = 10**8
CHUNK_POINTS = 1 << 14
TWO_PI = 2.0 * math.pi


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not frequencies")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("frequencies must be finite")
    return Fraction(x)


@dataclass(frozen=True)
class AlphaVector:
    """Frequencies grouped by degree: ``blocks[l - 1]`` is ``alpha_l``."""

    blocks: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks",
                           tuple(tuple(as_fraction(a) for a in b) for b in self.blocks))

    @classmethod
    def zeros(cls, shape: Sequence[int]) -> AlphaVector:
        return cls(tuple((Fraction(0),) * r for r in shape))

    @classmethod
    def from_flat(cls, shape: Sequence[int], values: Sequence) -> AlphaVector:
        values = list(values)
        if len(values) != sum(shape):
            raise ShapeError(f"{len(values)} values for shape {tuple(shape)}")
        out, k = [], 0
        for r in shape:
            out.append(tuple(values[k:k + r]))
            k += r
        return cls(tuple(out))

    @classmethod
    def for_system(cls, s: GradedSystem, blocks) -> AlphaVector:
        """``blocks`` maps degree to entries, or is a flat sequence in block order."""
        if isinstance(blocks, dict):
            out = []
            for ell in range(1, s.d + 1):
                out.append(tuple(blocks.get(ell, blocks.get(str(ell), ()))))
            a = cls(tuple(out))
        else:
            a = cls.from_flat(s.block_sizes, blocks)
        a.check(s)
        return a

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def flat(self) -> tuple[Fraction, ...]:
        return tuple(a for b in self.blocks for a in b)

    def check(self, s: GradedSystem) -> None:
        if self.shape != s.block_sizes:
            raise ShapeError(f"alpha shape {self.shape} does not match system {s.block_sizes}")

    def map(self, fn) -> AlphaVector:
        return AlphaVector(tuple(tuple(fn(a) for a in b) for b in self.blocks))

    def __neg__(self):
        return self.map(lambda a: -a)

    def shift(self, m: Sequence[int]) -> AlphaVector:
        """Add the integer vector ``m`` (flat, block order)."""
        flat = [a + int(k) for a, k in zip(self.flat(), m, strict=True)]
        return AlphaVector.from_flat(self.shape, flat)


def alpha_norms(a: AlphaVector) -> tuple[Fraction, Fraction]:
    """``(max distance to the nearest integer, max absolute value)``."""
    flat = a.flat()
    if not flat:
        return Fraction(0), Fraction(0)
    dist = max(abs(x - round(x)) for x in flat)
    return dist, max(abs(x) for x in flat)


@dataclass(frozen=True)
class BoxSpec:
    P: float
    n: int

    def __post_init__(self):
        if not self.P > 0:
            raise ValueError("P must be positive")

    @property
    def side(self) -> int:
        """Number of integer points per axis, ``floor(P) + 1``."""
        return math.floor(self.P) + 1

    @property
    def size(self) -> int:
        return self.side ** self.n


def phase_polynomial(s: GradedSystem, a: AlphaVector) -> tuple[Polynomial, int]:
    """Integer ``Phi`` and ``D`` with ``sum alpha_{l,r} u_{l,r} = Phi / D``."""
    a.check(s)
    D = 1
    for x in a.flat():
        D = D * x.denominator // math.gcd(D, x.denominator)
    phi = Polynomial.zero(s.n)
    for (ell, r, p), x in zip(s.polynomials(), a.flat()):
        c = x.numerator * (D // x.denominator)
        if c:
            phi = phi + c * p
    return phi, D


def _sum_chunk(args):
    sparse, D, n, side, lo, hi = args
    re, im = [], []
    for idx in range(lo, hi):
        x = []
        for _ in range(n):
            idx, c = divmod(idx, side)
            x.append(c)
        total = 0
        for c, factors in sparse:
            t = c
            for j, e in factors:
                t *= x[j] ** e
            total += t
        k = total % D
        if 2 * k > D:
            k -= D
        ang = TWO_PI * (k / D)
        re.append(math.cos(ang))
        im.append(math.sin(ang))
    return math.fsum(re), math.fsum(im)


def eval_S(s: GradedSystem, box: BoxSpec | float, a: AlphaVector, *,
           budget: int = DEFAULT_LATTICE_BUDGET, workers: int | None = 1) -> complex:
    """``sum over x in [0, P]^n of e(sum_{l,r} alpha_{l,r} u_{l,r}(x))``."""
    if not isinstance(box, BoxSpec):
        box = BoxSpec(box, s.n)
    if box.n != s.n:
        raise ShapeError(f"box dimension {box.n} differs from system dimension {s.n}")
    a.check(s)
    total = box.size
    if total > budget:
        raise BudgetError("lattice points", total, budget)
    phi, D = phase_polynomial(s, a)
    sparse = phi._sparse_terms()
    chunks = [(sparse, D, s.n, box.side, lo, hi) for lo, hi in split_range(0, total, CHUNK_POINTS)]
    parts = ordered_map(_sum_chunk, chunks, workers)
    return complex(math.fsum(p[0] for p in parts), math.fsum(p[1] for p in parts))


# -- partial summation ---------------------------------------------------------

Field = Callable[[tuple[int, ...], np.ndarray], np.ndarray]


class ExpLinear:
    """``f(x) = e(theta . x)`` with exact mixed partials."""

    def __init__(self, theta: Sequence[float]):
        self.theta = np.asarray(theta, dtype=float)

    def __call__(self, eps, pts):
        factor = np.prod([2j * np.pi * t for t, e in zip(self.theta, eps) if e]) if any(eps) else 1.0
        return factor * np.exp(2j * np.pi * (pts @ self.theta))


class PolyField:
    """A polynomial field; mixed partials by exact symbolic differentiation."""

    def __init__(self, p: Polynomial):
        self.p = p
        self._cache = {}

    def _partial(self, eps):
        if eps not in self._cache:
            q = self.p
            for i, e in enumerate(eps):
                if e:
                    q = q.derivative(i + 1)
            self._cache[eps] = q
        return self._cache[eps]

    def __call__(self, eps, pts):
        q = self._partial(tuple(eps))
        out = np.zeros(len(pts), dtype=complex)
        for m in q.terms:
            term = np.full(len(pts), float(m.coefficient))
            for j, e in enumerate(m.exponents):
                if e:
                    term = term * pts[:, j] ** e
            out += term
        return out


class Separable:
    """``f(x) = prod_i g_i(x_i)``; ``factors[i] = (g_i, g_i')`` act on arrays."""

    def __init__(self, factors):
        self.factors = list(factors)

    def __call__(self, eps, pts):
        out = np.ones(len(pts), dtype=complex)
        for i, (g, dg) in enumerate(self.factors):
            out = out * (dg if eps[i] else g)(pts[:, i])
        return out


def _rho_table(rho, N):
    if isinstance(rho, np.ndarray):
        table = np.asarray(rho, dtype=complex)
        if table.shape != tuple(k + 1 for k in N):
            raise ShapeError(f"rho table has shape {table.shape}, need {tuple(k + 1 for k in N)}")
        return table
    table = np.empty(tuple(k + 1 for k in N), dtype=complex)
    for x in itertools.product(*(range(k + 1) for k in N)):
        table[x] = rho(x)
    return table


def _cell_integrals(f, eps, active, N, T, nodes, weights):
    """Integral over each unit cell of ``[0, N_i]`` (active axes) of ``d^eps f * T``."""
    n = len(N)
    k = len(active)
    cells = np.array(list(itertools.product(*(range(N[i]) for i in active))), dtype=float)
    grid = np.array(list(itertools.product(nodes, repeat=k)))          # (m^k, k)
    wts = np.prod(np.array(list(itertools.product(weights, repeat=k))), axis=1)
    pts_active = cells[:, None, :] + grid[None, :, :]                 # (C, m^k, k)
    C, M = pts_active.shape[0], pts_active.shape[1]
    pts = np.empty((C, M, n))
    for i in range(n):
        pts[:, :, i] = N[i]
    for col, i in enumerate(active):
        pts[:, :, i] = pts_active[:, :, col]
    vals = f(eps, pts.reshape(-1, n)).reshape(C, M)
    idx = [np.full(C, N[i], dtype=int) for i in range(n)]
    for col, i in enumerate(active):
        idx[i] = cells[:, col].astype(int)
    tvals = T[tuple(idx)]
    return (vals @ wts) * tvals, cells


def _gauss01(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1) / 2, w / 2


def partial_summation_sides(f: Field, rho, N: Sequence[int], *, order: int = 10,
                            check_order: int = 14, tol: float = 1e-11) -> tuple[complex, complex]:
    """Both sides of the partial summation identity.

    Left: ``sum_{0 <= x <= N} f(x) rho(x)``.  Right: sum over ``eps in {0,1}^n``
    of ``(-1)^|eps|`` times the integral over the axes with ``eps_i = 1`` of
    ``d^eps f`` times the cumulative sum ``T_rho``, the other coordinates held
    at ``N_i``.  The factor ``N_i^(eps_i - 1)`` cancels the trivial integral
    over each held axis, which keeps ``N_i = 0`` well defined.
    """
    N = tuple(int(k) for k in N)
    n = len(N)
    if n > 3:
        raise ValueError("partial summation check supports n <= 3")
    if any(k < 0 for k in N):
        raise ValueError("N must be non-negative")
    table = _rho_table(rho, N)
    T = table
    for axis in range(n):
        T = np.cumsum(T, axis=axis)

    lattice = np.array(list(itertools.product(*(range(k + 1) for k in N))), dtype=float)
    fvals = f((0,) * n, lattice)
    terms = fvals * table.reshape(-1)
    lhs = complex(math.fsum(terms.real), math.fsum(terms.imag))

    x_lo, w_lo = _gauss01(order)
    x_hi, w_hi = _gauss01(check_order)
    parts_re, parts_im = [], []
    for eps in itertools.product((0, 1), repeat=n):
        active = [i for i in range(n) if eps[i]]
        sign = -1.0 if len(active) % 2 else 1.0
        if not active:
            v = f(eps, np.array([N], dtype=float))[0] * T[N]
        elif any(N[i] == 0 for i in active):
            continue
        else:
            lo, cells = _cell_integrals(f, eps, active, N, T, x_lo, w_lo)
            hi, _ = _cell_integrals(f, eps, active, N, T, x_hi, w_hi)
            diff = np.abs(hi - lo)
            worst = int(np.argmax(diff))
            scale = max(1.0, float(np.max(np.abs(hi))))
            if diff[worst] > tol * scale:
                cell = tuple(int(c) for c in cells[worst])
                raise QuadratureError(f"quadrature for eps={eps} did not converge", cell,
                                      float(diff[worst]))
            v = complex(math.fsum(hi.real), math.fsum(hi.imag))
        parts_re.append(sign * v.real)
        parts_im.append(sign * v.imag)
    rhs = complex(math.fsum(parts_re), math.fsum(parts_im))
    return lhs, rhs


def partial_summation_residual(f: Field, rho, N: Sequence[int], **kw) -> float:
    """``|LHS - RHS| / max(1, |LHS|)`` for the partial summation identity."""
    lhs, rhs = partial_summation_sides(f, rho, N, **kw)
    return abs(lhs - rhs) / max(1.0, abs(lhs))
