"""Exception taxonomy shared across the library.

The CLI maps these onto exit codes, so library code should raise the most
specific class that applies rather than bare ValueError/RuntimeError.
"""


class GaplabError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(GaplabError, ValueError):
    """Invalid input data: bad descriptors, malformed configs, empty windows."""


class NumericalError(GaplabError, RuntimeError):
    """A numerical procedure failed to converge or lost its invariants."""


class ResourceLimitError(GaplabError, RuntimeError):
    """A computation would exceed a hard size cap (e.g. label enumeration)."""
