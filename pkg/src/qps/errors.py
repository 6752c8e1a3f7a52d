"""Exception hierarchy shared by the library and the CLI exit-code contract."""


class QpsError(Exception):
    """Base class for all library errors."""


class InvalidInputError(QpsError):
    """Malformed or physically inadmissible input (CLI exit code 2)."""


class CoverageError(QpsError):
    """A grid does not cover the state well enough for the request (exit 3)."""


class UnsupportedError(QpsError):
    """A valid but unsupported combination was requested (exit 4)."""


class SaturationError(InvalidInputError):
    """Moments do not saturate the uncertainty relation."""


class GaugeMismatchError(InvalidInputError):
    """Two objects carry incompatible gauge choices."""
