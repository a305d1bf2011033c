"""Exception hierarchy.

Validation errors (bad input shapes or matrices that are not what they claim
to be) derive from ``ValidationError``; everything raised while computing on
valid input derives from ``DomainError``. The CLI maps the two families to
distinct exit codes.
"""


class QcondError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QcondError, ValueError):
    pass


class DomainError(QcondError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class NotProjection(ValidationError):
    pass


class NotDensityMatrix(ValidationError):
    pass


class ZeroVector(ValidationError):
    pass


class InvalidJoint(ValidationError):
    pass


class NotQubit(ValidationError):
    pass


class SchemaError(ValidationError):
    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class UnsupportedFormat(ValidationError):
    pass


class NoConvergence(DomainError):
    pass


class UnknownOutcome(DomainError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NotCommutative(DomainError):
    pass


class IncompatibleConditioning(DomainError):
    pass


class AllBranchesNull(DomainError):
    pass


class ZeroProbabilityOutcome(DomainError):
    def __init__(self, message, step=None):
        self.step = step
        super().__init__(message)


class TooFewSteps(DomainError):
    pass


class AxisOutOfRange(DomainError, IndexError):
    pass


class NotMutuallyExclusive(DomainError):
    pass


class OutOfSchedule(DomainError):
    pass


class ChainTooLarge(DomainError):
    pass
