"""Exception hierarchy shared by planners, oracle, simulator and CLI."""


class PulseSeekError(ValueError):
    """Base class for every error raised by this package."""


class NonPositiveLambda(PulseSeekError):
    pass


class NonPositiveLength(PulseSeekError):
    pass


class NegativeDensity(PulseSeekError):
    pass


class UnorderedBreakpoints(PulseSeekError):
    pass


class GridMismatch(PulseSeekError):
    pass


class EpsilonOutOfRange(PulseSeekError):
    pass


class NegativeMass(PulseSeekError):
    pass


class NotNormalized(PulseSeekError):
    pass


class RootNotBracketed(PulseSeekError):
    pass


class KOutOfRange(PulseSeekError):
    pass


class LOutOfRange(PulseSeekError):
    pass


class NOutOfRange(PulseSeekError):
    pass


class ApertureOrderViolation(PulseSeekError):
    pass


class LadderInvalid(PulseSeekError):
    pass


class NoSolution(PulseSeekError):
    """Shooting found no ladder for one candidate step count."""


class AllInfeasible(PulseSeekError):
    pass


class ZeroResponse(PulseSeekError):
    """A registration can never leave every receiver silent."""


class RegimeViolation(PulseSeekError):
    pass


class NotConverged(PulseSeekError):
    pass


class PlanExhausted(PulseSeekError):
    pass


class DecodeError(PulseSeekError):
    pass
