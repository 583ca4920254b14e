"""Exception types raised by the cfp package."""


class CFPError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(CFPError, ValueError):
    """Operands live in spaces of different dimension."""


class InvalidSet(CFPError, ValueError):
    """A set was constructed with data violating its invariants."""


class DegenerateCircumcenter(CFPError):
    """Three pairwise-distinct collinear points have no circumcenter."""


class NoExactProjector(CFPError):
    """The set kind has no closed-form or Newton-based projector."""


class NoOracle(CFPError):
    """The set kind has no level-function oracle (g, grad g)."""


class NewtonStall(CFPError):
    """The scalar multiplier solve of an ellipsoid projection did not converge."""


class ZeroGradient(CFPError):
    """A point outside the set has a vanishing gradient, so no cut exists."""


class NotInSubspace(CFPError, ValueError):
    """A circumcenter step was started from a point outside U."""


class InsufficientTrace(CFPError, ValueError):
    """Too few usable iterates to estimate a rate."""


class NoIntersectionOracle(CFPError):
    """dist(., K n U) is not computable for this problem."""


class RadialSingularity(CFPError, ValueError):
    """A radial closed form was evaluated at the origin."""


class HypothesisViolation(CFPError, ValueError):
    """A family constructor received a function violating its hypotheses."""


class ParseError(CFPError, ValueError):
    """An instance file is malformed."""


class EmptyResult(CFPError, ValueError):
    """A summary was requested for a benchmark with no rows."""


class InsufficientData(CFPError, ValueError):
    """A performance profile needs more methods or instances."""
