__all__ = [
    "ImdsError",
    "ModelParseError",
    "ResolutionError",
    "NotPreparedError",
    "NoPreparedActionError",
    "InvalidConfigurationError",
    "BoundExceeded",
    "FreshPoolExhausted",
    "NotComposableError",
    "CrossClassError",
    "UniverseTooLarge",
    "NotEnabledError",
    "ColorPoolExhausted",
    "NotTerminalError",
    "TruncatedGraphError",
]


class ImdsError(Exception):
    """Base class for every error raised by django_imds."""


class ModelParseError(ImdsError):
    def __init__(self, message, line=0, column=0):
        super().__init__(message)
        self.line = line
        self.column = column

    def __str__(self):
        if self.line:
            return f"{self.args[0]} (line {self.line}, column {self.column})"
        return self.args[0]


class ResolutionError(ImdsError, KeyError):
    def __str__(self):
        return self.args[0]


class NotPreparedError(ImdsError):
    pass


class NoPreparedActionError(ImdsError):
    pass


class InvalidConfigurationError(ImdsError):
    pass


class BoundExceeded(ImdsError):
    """
    A configured bound was hit. When raised by reach(), ``graph`` holds the
    truncated graph explored so far.
    """

    def __init__(self, message, graph=None):
        super().__init__(message)
        self.graph = graph


class FreshPoolExhausted(BoundExceeded):
    pass


class NotComposableError(ImdsError):
    pass


class CrossClassError(ImdsError):
    pass


class UniverseTooLarge(ImdsError):
    pass


class NotEnabledError(ImdsError):
    pass


class ColorPoolExhausted(ImdsError):
    pass


class NotTerminalError(ImdsError):
    pass


class TruncatedGraphError(ImdsError):
    pass
