"""Exception types shared across the package."""


class CirclesumError(Exception):
    """Base class for every error raised by circlesum."""


class ShapeError(CirclesumError, ValueError):
    """Input dimensions or block shapes do not agree."""


class BudgetError(CirclesumError):
    """A lattice, scan or quadrature budget would be exceeded.

    ``required`` carries the amount of work the request needs and
    ``budget`` the configured ceiling.
    """

    def __init__(self, what, required, budget):
        self.what = what
        self.required = required
        self.budget = budget
        super().__init__(f"{what}: {required} exceeds budget {budget}")


class ParseError(CirclesumError, ValueError):
    """Malformed polynomial text. ``token`` names the offending token."""

    def __init__(self, message, text, pos, token):
        self.text = text
        self.pos = pos
        self.token = token
        super().__init__(f"{message} at position {pos} (token {token!r}) in {text!r}")


class QuadratureError(CirclesumError):
    """Fixed-order quadrature disagreed with its refinement on some cell."""

    def __init__(self, message, cell, discrepancy):
        self.cell = cell
        self.discrepancy = discrepancy
        super().__init__(f"{message}; worst cell {cell} (discrepancy {discrepancy:.3e})")
