"""Exception hierarchy.

Every error carries the process exit status the CLI returns for it and a
human readable detail, the same pairing an HTTP error has with its status code.
"""


class BetheRCError(Exception):
    """Base class for all errors raised by this package"""

    title = "error"
    status = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class UsageError(BetheRCError):
    title = "usage error"
    status = 64


class VerificationMismatch(BetheRCError):
    title = "verification mismatch"
    status = 2


class IncompleteCensus(BetheRCError):
    title = "incomplete census"
    status = 3


class NotSingularError(BetheRCError):
    title = "solution is not singular"


class PoleError(BetheRCError):
    title = "spectral parameter hits a root"


class DivergentEnergyError(BetheRCError):
    title = "divergent energy"


class PrecisionError(BetheRCError):
    title = "insufficient working precision"


class ResourceError(BetheRCError):
    title = "size cap exceeded"


class DecompositionError(BetheRCError):
    title = "string decomposition failed"


class AssignmentError(BetheRCError):
    title = "rigging assignment failed"


class CountMismatchError(AssignmentError):
    title = "family size mismatch"


class ConvergenceError(BetheRCError):
    title = "no convergence"


class DegenerateDegreeError(BetheRCError):
    title = "degenerate polynomial degree"


class CensusIntegrityError(BetheRCError):
    title = "census integrity check failed"


class CensusReadError(BetheRCError):
    title = "census could not be read"
