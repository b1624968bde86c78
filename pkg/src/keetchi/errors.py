"""Exception types raised across the package."""


class KeetchiError(Exception):
    """Base class for all errors raised by this package."""


class MalformedName(KeetchiError, ValueError):
    pass


class MalformedMessage(KeetchiError, ValueError):
    pass


class InvalidParam(KeetchiError, ValueError):
    def __init__(self, reason, field=None):
        super().__init__(reason)
        self.field = field


class ClockSkew(KeetchiError, ValueError):
    pass


class Expired(KeetchiError):
    """A message was offered to a store after its validity ran out."""


class CausalityViolation(KeetchiError):
    pass


class NotPositional(KeetchiError):
    pass


class MalformedTrace(KeetchiError, ValueError):
    def __init__(self, line, reason):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class MalformedConfig(KeetchiError, ValueError):
    def __init__(self, key, reason):
        super().__init__(f"{key}: {reason}" if key else reason)
        self.key = key
        self.reason = reason
