"""Exception types shared across the package."""


class QmalsimError(Exception):
    """Base class for package errors."""


class ShapeError(QmalsimError, ValueError):
    """Array lengths or widths disagree."""


class ConfigError(QmalsimError, ValueError):
    """Invalid configuration or architecture."""


class ParseError(QmalsimError, ValueError):
    """Malformed input CSV. ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class EmptyDatasetError(ParseError):
    pass


class TrainingError(QmalsimError, RuntimeError):
    """Divergence or non-finite values during optimization."""


class ModelFormatError(QmalsimError, ValueError):
    """Model or report file is truncated, corrupted, or fails its checksum."""


class VersionError(ModelFormatError):
    def __init__(self, found, expected):
        self.found = found
        self.expected = expected
        super().__init__(f"unsupported format_version {found!r}; expected {expected!r}")
