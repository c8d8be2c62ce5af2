"""Exception hierarchy shared across the engine."""


class CQTError(ValueError):
    """Base class for every error raised by the engine."""


class DimensionMismatch(CQTError):
    pass


class NotHermitian(CQTError):
    pass


class InvalidState(CQTError):
    pass


class InvalidSampleSpace(CQTError):
    """A proposed sample space is not an orthogonal decomposition of the identity.

    ``violation`` names the failed condition (``"orthogonality"``,
    ``"completeness"`` or ``"zero_member"``) and ``detail`` carries the
    offending indices or residual.
    """

    def __init__(self, message, violation, detail=None):
        super().__init__(message)
        self.violation = violation
        self.detail = detail


class InconsistentFamily(CQTError):
    """Compound-event probabilities requested on a family that is not a framework."""


class ZeroProbabilityPrehistory(CQTError):
    pass


class CapExceeded(CQTError):
    pass


class EntangledState(CQTError):
    pass
