"""Exception types raised across the package."""


class MismatchError(Exception):
    """Base class for all package errors."""


class RankDeficient(MismatchError):
    """The design matrix does not have full column rank."""


class DimensionMismatch(MismatchError, ValueError):
    pass


class IndexOutOfRange(MismatchError, IndexError):
    pass


class BadShape(MismatchError, ValueError):
    pass


class EmptyActiveSet(MismatchError, ValueError):
    pass


class MissingTruth(MismatchError):
    """An operation needs ground truth that the instance does not carry."""


class WitnessNotFound(MismatchError):
    """No swap satisfying the one-step decrease inequality was found."""


class TooLarge(MismatchError, ValueError):
    """Instance is too large for a brute-force routine."""
