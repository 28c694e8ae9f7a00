"""Exception types shared across the package."""


class CwgldpcError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(CwgldpcError):
    """Operand shapes are incompatible."""


class DegenerateCode(CwgldpcError):
    """Parity-check matrix leaves no information bits (k = 0)."""


class TooShort(CwgldpcError):
    """Component code length below the minimum of 3."""


class TooLarge(CwgldpcError):
    """Brute-force oracle asked to enumerate too large a code."""


class DegenerateRow(CwgldpcError):
    """A constraint-node row has fewer than 3 edges."""


class ConfigMismatch(CwgldpcError):
    """Decoder configuration incompatible with the given code."""


class NotBracketed(CwgldpcError):
    """Threshold bisection endpoints do not bracket the transition."""


class BaseMatrixFormatError(CwgldpcError):
    """Malformed base-matrix file; carries line/column position."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
