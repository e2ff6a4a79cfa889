class TriodFlowError(Exception):
    """Base class for all errors raised by triodflow."""


class DegenerateSegment(TriodFlowError, ValueError):
    """Two consecutive nodes of a curve (nearly) coincide."""


class EmptyWindow(TriodFlowError, ValueError):
    pass


class JunctionSolveFailed(TriodFlowError, RuntimeError):
    pass


class TopologyMismatch(TriodFlowError, ValueError):
    pass


class InvalidHorizon(TriodFlowError, ValueError):
    """The kernel reference time does not lie after the state time."""


class InsufficientRecords(TriodFlowError, ValueError):
    pass


class NotEmbedded(TriodFlowError, ValueError):
    pass


class CutNotTransversal(TriodFlowError, ValueError):
    pass


class CollinearPoints(TriodFlowError, ValueError):
    pass


class PreconditionViolation(TriodFlowError, ValueError):
    pass


class ConfigError(TriodFlowError, ValueError):
    pass
