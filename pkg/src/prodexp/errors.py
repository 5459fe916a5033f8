"""Exception types shared across the package."""


class PreconditionError(ValueError):
    """Inputs violate an operation's stated precondition."""


class CapExceeded(RuntimeError):
    """An exhaustive computation would exceed its configured size cap."""


class TheoryViolation(AssertionError):
    """A statement that must hold mathematically was observed to fail.

    Raised only when an implementation bug (or a miscomputed operand) is the
    sole possible explanation.
    """
