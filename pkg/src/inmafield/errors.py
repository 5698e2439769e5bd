"""Exception types raised by the package."""


class InmaError(Exception):
    """Base class for all package errors."""


class ConfigurationError(InmaError, ValueError):
    """A model, innovation law or run configuration is invalid."""


class UsageError(InmaError, ValueError):
    """An operation was called outside its supported domain."""


class DomainError(InmaError, ArithmeticError):
    """A quantity is mathematically undefined for the given model."""


class ResourceError(InmaError, RuntimeError):
    """A configured size or enumeration budget would be exceeded."""
