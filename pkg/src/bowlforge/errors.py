"""Exception types shared across the package."""


class BowlforgeError(Exception):
    """Base class for all package-specific errors."""


class DomainError(BowlforgeError, ValueError):
    """A speed function was evaluated outside its domain (non-positive
    curvature input, negative base under a fractional power, division by
    zero), or produced a non-finite / non-positive value."""


class OutOfDomain(DomainError):
    """A curvature-constraint query fell outside the interval on which the
    constraint is solvable."""


class BracketFailure(BowlforgeError, RuntimeError):
    """Exponential bracketing ran out of floating-point range without
    straddling the target value."""


class NonConvergentLimit(BowlforgeError, RuntimeError):
    """A limit probe (boundary value, tail limit) did not stabilize; the
    monotone structure expected of an admissible speed was violated."""


class NonConvergent(NonConvergentLimit):
    """A tail estimate neither stabilized nor decayed."""


class NotApplicable(BowlforgeError, ValueError):
    """The requested quantity is undefined for this speed (e.g. a tail limit
    of a speed whose constraint domain is bounded)."""


class ParseError(BowlforgeError, ValueError):
    """Speed-expression syntax error, with byte offset and expected tokens."""

    def __init__(self, message: str, offset: int, expected: set[str] | None = None):
        self.offset = offset
        self.expected = frozenset(expected or ())
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += " (expected " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(detail)


class DimensionError(BowlforgeError, ValueError):
    """A symmetric-polynomial atom referenced an order beyond the ambient
    dimension."""


class NotHomogeneous(BowlforgeError, ValueError):
    """Per-point homogeneity estimates disagreed beyond tolerance."""


class StartupFailure(BowlforgeError, RuntimeError):
    """The translator ODE right-hand side was not finite at the regularized
    start point."""
