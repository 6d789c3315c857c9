"""Integer-coefficient multivariate polynomials and graded systems.

A :class:`Polynomial` is an immutable map from exponent tuples to nonzero
Python integers, kept in descending graded-lexicographic order.  A
:class:`GradedSystem` groups polynomials by degree: block ``l`` holds the
polynomials ``u_{l,1}, ..., u_{l,r_l}`` whose top-degree parts are the forms
``U_{l,r}``.

Text form::

    3*x1^2*x2 - x3 + 7

Variables are ``x1 .. xn``; ``+ - * ^`` and parentheses are accepted when
parsing, and :func:`format_polynomial` always emits the canonical expanded
form, so ``parse(str(p)) == p`` and ``str(parse(str(p))) == str(p)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import ParseError, ShapeError

Exps = tuple[int, ...]


class Monomial(NamedTuple):
    exponents: Exps
    coefficient: int

    @property
    def degree(self) -> int:
        return sum(self.exponents)


def _grlex_key(exps: Exps):
    return (sum(exps), exps)


class Polynomial:
    """Immutable polynomial in ``n`` variables with integer coefficients."""

    __slots__ = ("n", "terms", "_coeffs", "_sparse", "_hash")

    def __init__(self, n: int, coeffs: Mapping[Exps, int] | Iterable[tuple[Exps, int]] = ()):
        if n < 0:
            raise ShapeError(f"variable count must be non-negative, got {n}")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[Exps, int] = {}
        for exps, c in items:
            exps = tuple(exps)
            if len(exps) != n:
                raise ShapeError(f"exponent tuple {exps} has length {len(exps)}, expected {n}")
            if any((not isinstance(e, int)) or e < 0 for e in exps):
                raise ValueError(f"exponents must be non-negative integers: {exps}")
            if isinstance(c, bool) or not isinstance(c, int):
                raise TypeError(f"coefficients must be integers, got {c!r}")
            acc[exps] = acc.get(exps, 0) + c
        ordered = sorted((e for e, c in acc.items() if c), key=_grlex_key, reverse=True)
        terms = tuple(Monomial(e, acc[e]) for e in ordered)
        _set = object.__setattr__
        _set(self, "n", n)
        _set(self, "terms", terms)
        _set(self, "_coeffs", {m.exponents: m.coefficient for m in terms})
        _set(self, "_sparse", None)
        _set(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError(f"Polynomial is immutable (cannot set {name!r})")

    @classmethod
    def _trusted(cls, n: int, acc: dict) -> Polynomial:
        """Build from an already validated ``{exps: int}`` map (internal)."""
        self = object.__new__(cls)
        ordered = sorted((e for e, c in acc.items() if c), key=_grlex_key, reverse=True)
        terms = tuple(Monomial(e, acc[e]) for e in ordered)
        _set = object.__setattr__
        _set(self, "n", n)
        _set(self, "terms", terms)
        _set(self, "_coeffs", {m.exponents: m.coefficient for m in terms})
        _set(self, "_sparse", None)
        _set(self, "_hash", None)
        return self

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> Polynomial:
        return cls(n)

    @classmethod
    def constant(cls, n: int, c: int) -> Polynomial:
        return cls(n, {(0,) * n: c})

    @classmethod
    def variable(cls, n: int, i: int) -> Polynomial:
        """The coordinate ``x_i`` (1-based)."""
        if not 1 <= i <= n:
            raise ShapeError(f"variable index {i} outside 1..{n}")
        exps = [0] * n
        exps[i - 1] = 1
        return cls(n, {tuple(exps): 1})

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> Polynomial:
        return parse_polynomial(text, n)

    # -- basic structure ----------------------------------------------------

    def coefficient(self, exps: Exps) -> int:
        return self._coeffs.get(tuple(exps), 0)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((m.degree for m in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({m.degree for m in self.terms}) <= 1

    def variables(self) -> frozenset[int]:
        """0-based indices of the variables that actually occur."""
        return frozenset(j for m in self.terms for j, e in enumerate(m.exponents) if e)

    def degree_part(self, ell: int) -> Polynomial:
        return degree_part(self, ell)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.n, self.terms)))
        return self._hash

    def __repr__(self):
        return f"Polynomial({self.n}, {format_polynomial(self)!r})"

    def __str__(self):
        return format_polynomial(self)

    def __reduce__(self):
        return (Polynomial, (self.n, [(m.exponents, m.coefficient) for m in self.terms]))

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            if other.n != self.n:
                raise ShapeError(f"variable counts differ: {self.n} vs {other.n}")
            return other
        if isinstance(other, int) and not isinstance(other, bool):
            return Polynomial.constant(self.n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._coeffs)
        for e, c in other._coeffs.items():
            acc[e] = acc.get(e, 0) + c
        return Polynomial._trusted(self.n, acc)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._trusted(self.n, {e: -c for e, c in self._coeffs.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc: dict[Exps, int] = {}
        for e1, c1 in self._coeffs.items():
            for e2, c2 in other._coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                acc[e] = acc.get(e, 0) + c1 * c2
        return Polynomial._trusted(self.n, acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Polynomial.constant(self.n, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- evaluation -----------------------------------------------------------

    def _sparse_terms(self):
        if self._sparse is None:
            object.__setattr__(self, "_sparse", tuple(
                (m.coefficient, tuple((j, e) for j, e in enumerate(m.exponents) if e))
                for m in self.terms
            ))
        return self._sparse

    def __call__(self, x: Sequence[int]) -> int:
        return evaluate(self, x)

    def derivative(self, i: int) -> Polynomial:
        """Partial derivative in ``x_i`` (1-based)."""
        if not 1 <= i <= self.n:
            raise ShapeError(f"variable index {i} outside 1..{self.n}")
        j = i - 1
        acc = {}
        for e, c in self._coeffs.items():
            if e[j]:
                ne = list(e)
                ne[j] -= 1
                acc[tuple(ne)] = c * e[j]
        return Polynomial(self.n, acc)

    def compose(self, subs: Sequence[Polynomial]) -> Polynomial:
        """Substitute ``x_j -> subs[j]``; all of ``subs`` share one variable count."""
        if len(subs) != self.n:
            raise ShapeError(f"need {self.n} substitutions, got {len(subs)}")
        if not subs:
            return self
        m = subs[0].n
        if any(s.n != m for s in subs):
            raise ShapeError("substitutions must share a variable count")
        powers: dict[tuple[int, int], Polynomial] = {}

        def power(j, e):
            key = (j, e)
            if key not in powers:
                powers[key] = subs[j] ** e
            return powers[key]

        result = Polynomial.zero(m)
        for coeff, factors in self._sparse_terms():
            t = Polynomial.constant(m, coeff)
            for j, e in factors:
                t = t * power(j, e)
            result = result + t
        return result

    def substitute(self, values: Mapping[int, int]) -> Polynomial:
        """Fix some variables (0-based index -> integer) and drop them.

        The remaining variables keep their relative order.
        """
        keep = [j for j in range(self.n) if j not in values]
        acc: dict[Exps, int] = {}
        for e, c in self._coeffs.items():
            for j, v in values.items():
                if e[j]:
                    c *= v ** e[j]
            if c:
                ne = tuple(e[j] for j in keep)
                acc[ne] = acc.get(ne, 0) + c
        return Polynomial(len(keep), acc)


def degree_part(p: Polynomial, ell: int) -> Polynomial:
    """Sum of the terms of ``p`` of total degree exactly ``ell``."""
    return Polynomial(p.n, {m.exponents: m.coefficient for m in p.terms if m.degree == ell})


def evaluate(p: Polynomial, x: Sequence[int]) -> int:
    """Exact integer value of ``p`` at the integer point ``x``."""
    if len(x) != p.n:
        raise ShapeError(f"point has {len(x)} coordinates, polynomial has {p.n} variables")
    total = 0
    for coeff, factors in p._sparse_terms():
        t = coeff
        for j, e in factors:
            t *= x[j] ** e
        total += t
    return total


# -- text form ----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|x(\d+)|([-+*^()])|(\S))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1) is not None:
            tokens.append(("int", int(m.group(1)), m.start(1), m.group(1)))
        elif m.group(2) is not None:
            tokens.append(("var", int(m.group(2)), m.start(0) + len(m.group(0)) - len(m.group(2)) - 1,
                           "x" + m.group(2)))
        elif m.group(3) is not None:
            tokens.append(("op", m.group(3), m.start(3), m.group(3)))
        else:
            raise ParseError("unexpected character", text, m.start(4), m.group(4))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def fail(self, message):
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            pos = len(self.text)
            token = last[3] if last else ""
            raise ParseError(message + " (unexpected end of input" +
                             (f" after {token!r})" if token else ")"), self.text, pos, token)
        raise ParseError(message, self.text, tok[2], tok[3])

    def take_op(self, op):
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] == op:
            self.i += 1
            return True
        return False

    def expr(self) -> Polynomial:
        if self.take_op("-"):
            acc = -self.term()
        else:
            self.take_op("+")
            acc = self.term()
        while True:
            if self.take_op("+"):
                acc = acc + self.term()
            elif self.take_op("-"):
                acc = acc - self.term()
            else:
                return acc

    def term(self) -> Polynomial:
        acc = self.power()
        while self.take_op("*"):
            acc = acc * self.power()
        return acc

    def power(self) -> Polynomial:
        base = self.atom()
        if self.take_op("^"):
            tok = self.peek()
            if tok is None or tok[0] != "int":
                self.fail("expected a non-negative integer exponent")
            self.i += 1
            return base ** tok[1]
        return base

    def atom(self) -> Polynomial:
        tok = self.peek()
        if tok is None:
            self.fail("expected a number, variable or '('")
        kind, value = tok[0], tok[1]
        if kind == "int":
            self.i += 1
            return Polynomial.constant(self.n, value)
        if kind == "var":
            if not 1 <= value <= self.n:
                raise ParseError(f"variable outside x1..x{self.n}", self.text, tok[2], tok[3])
            self.i += 1
            return Polynomial.variable(self.n, value)
        if kind == "op" and value == "(":
            self.i += 1
            inner = self.expr()
            if not self.take_op(")"):
                self.fail("expected ')'")
            return inner
        if kind == "op" and value == "-":
            self.i += 1
            return -self.power()
        self.fail("expected a number, variable or '('")

    def parse(self) -> Polynomial:
        if not self.tokens:
            raise ParseError("empty polynomial", self.text, 0, "")
        p = self.expr()
        if self.peek() is not None:
            self.fail("unexpected token")
        return p


def parse_polynomial(text: str, n: int | None = None) -> Polynomial:
    """Parse the text form.  ``n`` defaults to the largest variable index seen."""
    if n is None:
        n = max((int(v) for v in re.findall(r"x(\d+)", text)), default=0)
    return _Parser(text, n).parse()


def _format_monomial(exps: Exps) -> str:
    parts = []
    for j, e in enumerate(exps):
        if e == 1:
            parts.append(f"x{j + 1}")
        elif e > 1:
            parts.append(f"x{j + 1}^{e}")
    return "*".join(parts)


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    out = []
    for k, (exps, c) in enumerate(p.terms):
        mono = _format_monomial(exps)
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if k == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


# -- graded systems -----------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    ell: int
    r: int
    message: str

    def __str__(self):
        return f"u_{{{self.ell},{self.r}}}: {self.message}"


@dataclass(frozen=True)
class GradedSystem:
    """The system ``u = (u_d, ..., u_1)``.

    ``blocks[l - 1]`` holds the degree-``l`` polynomials; an empty tuple means
    ``r_l = 0``.
    """

    n: int
    blocks: tuple[tuple[Polynomial, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))

    @classmethod
    def from_blocks(cls, n: int, blocks: Mapping[int, Sequence[Polynomial | str]]) -> GradedSystem:
        """Build from ``{l: [poly or text, ...]}``; missing degrees are empty."""
        d = max((int(k) for k, v in blocks.items() if v), default=0)
        out = []
        for ell in range(1, d + 1):
            polys = []
            for p in blocks.get(ell, blocks.get(str(ell), ())) or ():
                polys.append(parse_polynomial(p, n) if isinstance(p, str) else p)
            out.append(tuple(polys))
        return cls(n, tuple(out))

    @property
    def d(self) -> int:
        return len(self.blocks)

    @property
    def block_sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    @property
    def R(self) -> int:
        return sum(self.block_sizes)

    def r(self, ell: int) -> int:
        return len(self.blocks[ell - 1]) if 1 <= ell <= self.d else 0

    def block(self, ell: int) -> tuple[Polynomial, ...]:
        return self.blocks[ell - 1] if 1 <= ell <= self.d else ()

    def forms(self, ell: int) -> tuple[Polynomial, ...]:
        """The top-degree parts ``U_{l,1}, ..., U_{l,r_l}``."""
        return tuple(degree_part(p, ell) for p in self.block(ell))

    def polynomials(self):
        """Yield ``(l, r, u_{l,r})`` in block order, ``r`` 1-based."""
        for ell, block in enumerate(self.blocks, start=1):
            for r, p in enumerate(block, start=1):
                yield ell, r, p

    def require_valid(self) -> None:
        problems = validate_system(self)
        if problems:
            raise ShapeError("invalid system: " + "; ".join(map(str, problems)))


def validate_system(s: GradedSystem) -> list[Violation]:
    """Every way ``s`` fails to be a well-formed graded integer system."""
    out = []
    for ell, r, p in s.polynomials():
        if not isinstance(p, Polynomial):
            out.append(Violation(ell, r, f"not a polynomial: {p!r}"))
            continue
        if p.n != s.n:
            out.append(Violation(ell, r, f"has {p.n} variables, system has {s.n}"))
            continue
        if any(not isinstance(m.coefficient, int) for m in p.terms):
            out.append(Violation(ell, r, "non-integer coefficient"))
        if p.degree != ell:
            out.append(Violation(ell, r, f"degree {p.degree} placed in degree-{ell} block"))
    return out
