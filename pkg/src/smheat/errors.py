"""Exception types raised across the package."""


class SmheatError(Exception):
    """Base class for domain errors (CLI exit status 1)."""


class InvalidParams(SmheatError, ValueError):
    pass


class InvalidBounds(SmheatError, ValueError):
    pass


class InvalidGrid(SmheatError, ValueError):
    pass


class TooFewNodes(SmheatError, ValueError):
    pass


class StencilOutOfRange(SmheatError, IndexError):
    pass


class SingularSystem(SmheatError, ArithmeticError):
    pass


class NonFinite(SmheatError, ArithmeticError):
    pass


class CacheMismatch(SmheatError, ValueError):
    pass


class EmptyDataset(SmheatError, ValueError):
    pass


class LengthMismatch(SmheatError, ValueError):
    pass


class InsufficientPairs(SmheatError, ValueError):
    pass


class ConfigError(Exception):
    """Malformed configuration or missing input files (CLI exit status 2)."""


class MissingDataset(ConfigError, FileNotFoundError):
    pass
