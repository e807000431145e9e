"""Shared exception types."""


class CofillError(Exception):
    pass


class EscapesBallError(CofillError):
    """A walk, prefix, or translate left the finite ball."""


class NotARelationError(CofillError):
    """The word does not represent the identity."""


class NotACycleError(CofillError):
    """boundary1 of the chain is nonzero."""


class BallBudgetError(CofillError):
    """Vertex budget exceeded while building a ball."""


class EnumerationBudgetError(CofillError):
    """Walk budget exceeded during exhaustive relation enumeration."""


class FillBudgetError(CofillError):
    """Branch-and-bound node budget exceeded; carries the best bounds found."""

    def __init__(self, lower, upper, certificate=None):
        super().__init__(f"fill budget exceeded (bounds {lower} .. {upper})")
        self.lower = lower
        self.upper = upper
        self.certificate = certificate


class NotExactError(CofillError):
    """The cochain is not exact: dt = u has no solution even without bounds."""


class UnevaluablePairError(CofillError):
    """A bar-cochain was asked for a pair outside its stored domain."""
