"""Exception types shared across the library."""


class RenormLabError(Exception):
    """Base class for all library errors."""


class NoConvergence(RenormLabError):
    """Iteration budget exhausted without meeting the tolerance."""


class DerivativeVanished(RenormLabError):
    """Newton iteration hit a point where the derivative underflows."""


class DegenerateInput(RenormLabError):
    """Fit input carries no usable spread (e.g. all abscissas equal)."""


class OutOfDomain(RenormLabError):
    """Argument outside the operation's domain."""


class PrecisionExhausted(RenormLabError):
    """Working precision cannot resolve the requested depth.

    Carries whatever partial result was computed in ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NotEnoughQuotients(RenormLabError):
    """Continued fraction is shorter than the requested convergent index."""


class DegenerateSpec(RenormLabError):
    """Circle-map spec rejected (critical points collide within tolerance)."""


class TargetUnattainable(RenormLabError):
    """Bisection bracket collapsed without meeting the target."""


class RationalRotationNumber(RenormLabError):
    """Operation needs an irrational rotation number but found a rational one."""


class NotIrrational(RationalRotationNumber):
    """Alias used by pair construction."""


class LevelsNotConsecutive(RenormLabError):
    """Partition refinement check got non-consecutive levels or base points."""


class InfiniteHeight(RenormLabError):
    """Pre-renormalization attempted on a pair with infinite height."""


class HeightExceedsCap(RenormLabError):
    """Height iteration passed the caller-set cap without resolving."""


class PreconditionFailed(RenormLabError):
    """A checked hypothesis of an operation failed; details in the message."""


class DegenerateInterval(RenormLabError):
    """Interval of zero length where a positive length is required."""


class IncompatiblePairs(RenormLabError):
    """Pair distance requested for pairs whose domains do not overlap."""


class DegeneratePoint(RenormLabError):
    """Angle requested at an interval endpoint."""


class BranchLost(RenormLabError):
    """Inverse-branch tracking left the guard disk."""


class TooManyBranchFailures(RenormLabError):
    """More than the tolerated fraction of probe samples lost their branch."""


class TooFewValidSamples(RenormLabError):
    """Growth check retained too few evaluable samples for a fit."""


class NonCriticalPair(RenormLabError):
    """Growth check rejects pairs that carry no critical point at the origin."""


class RotationNumberMismatch(RenormLabError):
    """Conjugacy construction needs equal rotation numbers.

    ``index`` is the first differing partial quotient.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class LevelMismatch(RenormLabError):
    """Diagnostics got conjugacy tables from different pairs or broken levels."""
