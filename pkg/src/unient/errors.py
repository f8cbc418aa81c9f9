"""Exception types raised across the package."""


class UnientError(Exception):
    """Base class for all package errors."""


class ShapeMismatch(UnientError, ValueError):
    pass


class NotNormal(UnientError, ValueError):
    pass


class NoConvergence(UnientError, ArithmeticError):
    pass


class NotUnitary(UnientError, ValueError):
    pass


class TranscriptionError(UnientError):
    """An embedded constant failed its self-check at construction time."""


class ShapeUnknown(UnientError, ValueError):
    pass


class UnknownGate(UnientError, KeyError):
    pass


class OracleDisagreement(UnientError):
    """Two independent separability criteria disagree at the given tolerance."""


class InvalidGenome(UnientError, ValueError):
    pass


class GateFileInvalid(UnientError, ValueError):
    pass
