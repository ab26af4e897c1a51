"""Exception hierarchy."""


class TwinlabError(Exception):
    """Base class for all package errors."""


class DimensionError(TwinlabError, ValueError):
    """Operands live in Hilbert spaces of different dimension."""


class ValidationError(TwinlabError, ValueError):
    """A value violates the invariants of its type (not unitary, not a projector, ...)."""


class PreconditionError(TwinlabError, ValueError):
    """Inputs are valid objects but fall outside the hypotheses of the requested check."""


class TheoremViolation(TwinlabError, AssertionError):
    """A proven implication failed numerically; indicates a bug or a tolerance problem."""
