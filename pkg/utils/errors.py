"""
Error types raised across the package

Every error derives from ErlError so the CLI can turn any library failure
into a one-line diagnostic.
"""
from typing import Optional


class ErlError(Exception):
    """Base class for all library errors"""


class InputError(ErlError, ValueError):
    """Dimension, layout or name mismatch in caller-supplied data"""


class NumericError(ErlError, ArithmeticError):
    """Non-finite gradient, loss or parameter value"""


class StateError(ErlError, RuntimeError):
    """Operation called on an object in the wrong state"""


class UsageError(StateError):
    """Environment used out of protocol (e.g. step after done)"""


class ConfigError(ErlError, ValueError):
    """
    Configuration could not be parsed or validated

    Attributes:
        key: Dotted path of the offending key ('<file>' for parse failures)
    """

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key
