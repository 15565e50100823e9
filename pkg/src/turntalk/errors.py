"""Exception taxonomy shared across the package.

Every error carries a stable ``code`` string that the HTTP layer maps 1:1
into structured error bodies, so clients never need to parse messages.
"""

from __future__ import annotations


class TurntalkError(Exception):
    """Base class; ``code`` is the wire-level error identifier."""

    code = "TurntalkError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class BadRequest(TurntalkError):
    """Malformed request field caught at the API boundary."""

    code = "BadRequest"


# -- session / engine ------------------------------------------------------

class WrongState(TurntalkError):
    code = "WrongState"


class DyadBusy(TurntalkError):
    code = "DyadBusy"


class InvalidTopic(TurntalkError):
    code = "InvalidTopic"


class SessionEnded(TurntalkError):
    code = "SessionEnded"


class UnknownDyad(TurntalkError):
    code = "UnknownDyad"


class UnknownSession(TurntalkError):
    code = "UnknownSession"


class UnknownCard(TurntalkError):
    code = "UnknownCard"


class UnknownGuide(TurntalkError):
    code = "UnknownGuide"


class BadPosition(TurntalkError):
    code = "BadPosition"


class InvalidProfile(TurntalkError):
    code = "InvalidProfile"

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations) or "invalid profile")


# -- providers ---------------------------------------------------------------

class ProviderUnavailable(TurntalkError):
    code = "ProviderUnavailable"


class MalformedOutput(TurntalkError):
    code = "MalformedOutput"


class UnrecognizedAudio(TurntalkError):
    code = "UnrecognizedAudio"


class EmptyInput(TurntalkError):
    code = "EmptyInput"


# -- similarity store --------------------------------------------------------

class UnknownCollection(TurntalkError):
    code = "UnknownCollection"


class DimensionMismatch(TurntalkError):
    code = "DimensionMismatch"


class ZeroVector(TurntalkError):
    code = "ZeroVector"


# -- analytics ---------------------------------------------------------------

class EmptySet(TurntalkError):
    code = "EmptySet"


class InsufficientData(TurntalkError):
    code = "InsufficientData"


class CorruptLog(TurntalkError):
    code = "CorruptLog"


# -- service -----------------------------------------------------------------

class ConfigError(TurntalkError):
    code = "ConfigError"


class PayloadTooLarge(TurntalkError):
    code = "PayloadTooLarge"
