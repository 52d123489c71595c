"""Exception hierarchy shared across the package."""


class QdoeError(Exception):
    """Base class for all package errors."""


class ParameterError(QdoeError):
    """A value passed to a constructor or operation is invalid."""


class DomainError(QdoeError):
    """An argument lies outside the mathematical domain of an operation."""


class DimensionError(QdoeError):
    """Array shapes are inconsistent with a declared dimension."""


class DegeneracyError(QdoeError):
    """A sample is degenerate for the requested operation (constant column,
    zero kernel bandwidth)."""


class EvaluationError(QdoeError):
    """A model evaluation produced a non-finite value or hit an invalid row."""


class ConfigError(QdoeError):
    """An experiment configuration is malformed or inconsistent."""
