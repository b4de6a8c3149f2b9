"""Exception taxonomy shared across the toolkit.

Exit-code mapping for the CLI: UsageError -> 1, DataError -> 2,
TransportError -> 3.
"""


class GazeStreamError(Exception):
    """Base class for all toolkit errors."""


class DataError(GazeStreamError):
    """Malformed, missing, or inconsistent input data."""


class TransportError(GazeStreamError):
    """Oracle or adapter endpoint failure after retries."""


class OracleResponseError(DataError):
    """An oracle answered, but the payload does not satisfy the schema."""
