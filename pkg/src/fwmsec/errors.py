"""Exception hierarchy shared by all fwmsec modules."""


class FwmsecError(Exception):
    """Base class for every error raised by the package."""


class DomainError(FwmsecError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class GridShapeError(FwmsecError, ValueError):
    """Arrays or axes of a signal grid do not line up."""


class DarkPointError(FwmsecError, ValueError):
    """A polarization state was requested for a point with no intensity."""


class ValidationError(FwmsecError, ValueError):
    """A matrix or record failed a physical consistency check."""


class ParseError(FwmsecError, ValueError):
    """A data file does not conform to its documented format.

    ``line`` is the 1-based line number of the offending line, when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(FwmsecError, ValueError):
    """A run configuration or toggling scheme is inconsistent with the data."""
