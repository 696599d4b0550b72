"""Exception hierarchy.

Every protocol rejection is an :class:`AndnaError` whose ``reason`` is the
short name that shows up in event logs (``OverQuota``, ``StaleId`` ...).
"""


class AndnaError(Exception):
    reason = "Error"

    def __init__(self, message=None):
        super().__init__(message or self.reason)


class LengthError(AndnaError, ValueError):
    reason = "LengthError"


class EmptyNetwork(AndnaError):
    reason = "EmptyNetwork"


class MalformedKey(AndnaError, ValueError):
    reason = "MalformedKey"


class QueueFull(AndnaError):
    reason = "QueueFull"


class UnknownHostname(AndnaError):
    reason = "UnknownHostname"


class UnknownKey(AndnaError):
    reason = "UnknownKey"


class StaleId(AndnaError):
    reason = "StaleId"


class GapId(AndnaError):
    reason = "GapId"


class NotOwner(AndnaError):
    reason = "NotOwner"


class QueuedNotActive(AndnaError):
    reason = "QueuedNotActive"


class PerNameLimit(AndnaError):
    reason = "PerNameLimit"


class GlobalLimit(AndnaError):
    reason = "GlobalLimit"


class InvalidRecord(AndnaError, ValueError):
    reason = "InvalidRecord"


class BadSignature(AndnaError):
    reason = "BadSignature"


class AllDisabled(AndnaError):
    reason = "AllDisabled"


class DuplicateIp(AndnaError):
    reason = "DuplicateIp"


class UnknownIp(AndnaError):
    reason = "UnknownIp"


class ScenarioError(AndnaError):
    """Malformed scenario file; carries the offending line number."""

    reason = "ScenarioError"

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
