"""Exception types shared across the toolkit.

The CLI maps these onto process exit codes: ConfigError -> 1,
DataError -> 2, InvariantError -> 3.
"""


class MulticoordError(Exception):
    """Base class for toolkit errors."""


class ConfigError(MulticoordError):
    """Invalid run configuration or command usage."""


class DataError(MulticoordError):
    """Unusable input data (unreadable files, empty inputs, scope mismatches)."""


class InvariantError(MulticoordError):
    """An internal consistency check failed; indicates a bug, not bad input."""


class UndefinedMetricError(MulticoordError):
    """A metric has no defined value on this input (e.g. constant degree vector)."""


class DegenerateSampleError(MulticoordError):
    """A statistical test cannot be computed (zero variance estimate)."""
