"""Exception hierarchy.

Every error derives from ``AdaptiveGibbsError`` (itself a ``ValueError``) so
callers can catch the whole family at once.
"""


class AdaptiveGibbsError(ValueError):
    pass


class BadEpsilon(AdaptiveGibbsError):
    pass


class SumNotOne(AdaptiveGibbsError):
    pass


class EntryBelowEpsilon(AdaptiveGibbsError):
    pass


class DimensionMismatch(AdaptiveGibbsError):
    pass


class LengthMismatch(AdaptiveGibbsError):
    pass


class NotNormalized(AdaptiveGibbsError):
    pass


class StateOutOfSpace(AdaptiveGibbsError):
    pass


class MissingConditionalSampler(AdaptiveGibbsError):
    pass


class NonFiniteLogDensity(AdaptiveGibbsError):
    pass


class AdaptationLeftY(AdaptiveGibbsError):
    pass


class BadMass(AdaptiveGibbsError):
    pass


class BadExponent(AdaptiveGibbsError):
    pass


class NoFeasibleExponent(AdaptiveGibbsError):
    pass


class BadCoord(AdaptiveGibbsError):
    pass


class StateOutsideTruncation(AdaptiveGibbsError):
    pass


class NotAMeasure(AdaptiveGibbsError):
    pass


class TruncationTooSmall(AdaptiveGibbsError):
    pass


class ScaleOutOfRange(AdaptiveGibbsError):
    pass


class ConfigError(AdaptiveGibbsError):
    pass
