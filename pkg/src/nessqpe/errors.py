"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to.
"""


class NessError(Exception):
    exit_code = 1


class DimensionError(NessError, ValueError):
    exit_code = 2


class ModelError(NessError, ValueError):
    exit_code = 2


class ResourceError(NessError):
    exit_code = 2


class LocalityError(NessError, ValueError):
    exit_code = 2


class ConsistencyError(NessError):
    """An internal invariant failed (Hermiticity, spectral identities...)."""

    exit_code = 3


class NonUniqueNessError(ConsistencyError):
    exit_code = 3


class ConvergenceError(ConsistencyError):
    exit_code = 3


class DegenerateOutputError(ConsistencyError):
    exit_code = 3


class PostselectionError(NessError):
    exit_code = 4
