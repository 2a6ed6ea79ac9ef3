"""Exception types raised across the library."""


class CmvLabError(Exception):
    """Base class for all library errors."""


class ZeroArgument(CmvLabError, ValueError):
    pass


class OddDegree(CmvLabError, ValueError):
    pass


class ZeroRoot(CmvLabError, ValueError):
    pass


class ResolutionExceeded(CmvLabError):
    pass


class SupportCollision(CmvLabError):
    pass


class QuasidefiniteViolation(CmvLabError):
    """A leading principal minor vanished; ``index`` is the offending pivot."""

    def __init__(self, index, pivot=None):
        self.index = index
        self.pivot = pivot
        super().__init__(f"QuasidefiniteViolation({index}): pivot {pivot!r} below floor")


class IndexOutOfRange(CmvLabError, IndexError):
    pass


class DomainViolation(CmvLabError):
    pass


class TailTooLarge(CmvLabError):
    pass


class SingularLeadingBlock(CmvLabError):
    pass


class IncompatibleTruncations(CmvLabError):
    pass
