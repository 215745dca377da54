"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` (bad input, a
violated precondition) and :class:`NumericalError` (a computation that
could not be completed to the requested accuracy).  The CLI maps them to
exit codes 1 and 2.
"""


class SLError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SLError, ValueError):
    pass


class NumericalError(SLError, ArithmeticError):
    pass


# --- problem definition -------------------------------------------------

class EmptyInterval(ValidationError):
    pass


class NonPositiveCoefficient(ValidationError):
    pass


class NonLocallyIntegrable(ValidationError):
    pass


class ProblemFileError(ValidationError):
    pass


class PreconditionError(ValidationError):
    pass


class NotDifferentiable(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class BoundaryViolation(ValidationError):
    pass


class SupportViolation(ValidationError):
    pass


class NonPositive(ValidationError):
    pass


class VanishingBase(ValidationError):
    pass


class VanishingNearEndpoint(ValidationError):
    pass


class EndpointSingular(ValidationError):
    pass


class LimitPointEndpoint(ValidationError):
    pass


class OscillatoryWitness(ValidationError):
    pass


# --- numerics -----------------------------------------------------------

class QuadratureFailure(NumericalError):
    pass


class StepSizeUnderflow(NumericalError):
    pass


class IntegrationFailure(NumericalError):
    pass


class InternalConsistencyError(NumericalError):
    """Both u and its quasi-derivative vanished at a node."""


class Oscillatory(NumericalError):
    pass


class DivergentConstruction(NumericalError):
    pass


class NonConvergentLimit(NumericalError):
    pass


class NumericallyDegenerate(NumericalError):
    pass


class BracketFailure(NumericalError):
    pass


class MonotonicityViolation(NumericalError):
    pass


class CeilingReached(NumericalError):
    pass


class FloorReached(NumericalError):
    pass
