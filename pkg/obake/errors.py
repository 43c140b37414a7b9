# obake/errors.py

from typing import Optional


class ObakeError(Exception):
    """Base class for all obake errors."""
    pass


class ParameterError(ObakeError):
    """Invalid protocol parameters or arguments that violate them."""
    pass


class EntropyError(ObakeError):
    """The entropy source could not deliver random bytes."""
    pass


class EncodingError(ObakeError):
    """A message cannot be framed under the given parameters."""
    pass


class DecodeError(ObakeError):
    """A frame could not be decoded."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class TransportError(ObakeError):
    """Infrastructure failure beneath the protocol (timeout, closed channel, socket error)."""

    def __init__(self, message: str, cause: Optional[BaseException] = None):
        super().__init__(message)
        self.cause = cause


class ConfigError(ObakeError):
    """Error related to configuration or command-line values."""
    pass


class TemplateStoreError(ConfigError):
    """A template file could not be read or parsed."""
    pass
