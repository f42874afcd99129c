"""Exception hierarchy shared across the library.

Everything raised on purpose derives from :class:`ClusterForestError`, so
callers (notably the CLI) can catch one type and map it to a data/model
error exit code. Most leaves also derive from ``ValueError`` to stay
friendly to generic callers.
"""


class ClusterForestError(Exception):
    """Base class for all library errors."""


class DataSchemaError(ClusterForestError, ValueError):
    """A named column is missing or the file layout is wrong."""


class DataParseError(ClusterForestError, ValueError):
    """A cell could not be parsed as a number."""


class EmptyInputError(ClusterForestError, ValueError):
    """An input that must be nonempty is empty."""


class SplitError(ClusterForestError, ValueError):
    """A requested partition of the rows is impossible."""


class ShapeError(ClusterForestError, ValueError):
    """Array dimensions do not line up."""


class InsufficientDataError(ClusterForestError, ValueError):
    """Too few samples for the requested statistic."""


class InsufficientPointsError(ClusterForestError, ValueError):
    """Fewer distinct points than requested clusters."""


class ClassCatalogError(ClusterForestError, ValueError):
    """A label falls outside the declared class catalog."""


class ConfigError(ClusterForestError, ValueError):
    """Invalid or inconsistent configuration."""


class UndefinedMetricError(ClusterForestError, ValueError):
    """The metric is undefined for the given inputs (e.g. one class only)."""


class ModelFormatError(ClusterForestError, ValueError):
    """Model file is corrupt, truncated, or has an unsupported version."""
