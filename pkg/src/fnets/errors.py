"""Exception hierarchy shared by all modules.

Each class carries the process exit code used by the command-line front end:
0 success, 2 usage, 3 data/format/dimension, 4 numerical/solver.
"""


class FnetsError(Exception):
    exit_code = 1


class UsageError(FnetsError):
    """Conflicting or malformed command-line options."""

    exit_code = 2


class FormatError(FnetsError):
    """Input file could not be parsed."""

    exit_code = 3


class DataError(FnetsError):
    """Input values unusable: non-finite entries, degenerate matrices, empty sets."""

    exit_code = 3


class DimensionError(FnetsError):
    """Shapes or sizes incompatible with the requested operation."""

    exit_code = 3


class NumericalError(FnetsError):
    """A computation lost numerical consistency."""

    exit_code = 4


class SolverError(FnetsError):
    """The linear-programming solver failed."""

    exit_code = 4
