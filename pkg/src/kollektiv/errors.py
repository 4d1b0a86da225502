"""Exception and warning types raised across the package."""


class KollektivError(Exception):
    """Base class for every error raised by kollektiv."""


class EmptyPrefix(KollektivError, ValueError):
    pass


class UnknownLabel(KollektivError, KeyError):
    pass


class BadSchedule(KollektivError, ValueError):
    pass


class InadmissibleSelection(KollektivError, LookupError):
    """A place selection tried to look at the current label or beyond."""


class LengthMismatch(KollektivError, ValueError):
    pass


class ConditionUndefined(KollektivError, ZeroDivisionError):
    """Conditioning on a label that never occurs in the prefix."""


class NotCombinable(KollektivError):
    pass


class UnknownAtom(KollektivError, KeyError):
    pass


class SpaceMismatch(KollektivError, ValueError):
    pass


class NoDensity(KollektivError, ValueError):
    """P is not absolutely continuous with respect to Q."""


class StructureViolation(KollektivError, ValueError):
    """Observable tables are not induced from one set of per-photon values."""


class NotNormalized(KollektivError, ValueError):
    pass


class ConfigError(KollektivError, ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class EmptySelection(UserWarning):
    """A selection (place selection or derived subsequence) picked nothing."""
