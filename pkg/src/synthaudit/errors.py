"""Exception types raised across the package."""


class SynthAuditError(Exception):
    """Base class for every error raised by synthaudit."""


class UnknownColumn(SynthAuditError, KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unknown column {self.name!r}"


class SchemaMismatch(SynthAuditError, ValueError):
    def __init__(self, column, detail=""):
        self.column = column
        msg = f"schema mismatch on column {column!r}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class NoLabelColumn(SynthAuditError, ValueError):
    pass


class ParseError(SynthAuditError, ValueError):
    def __init__(self, row, col, content, reason="cannot parse"):
        self.row, self.col, self.content = row, col, content
        super().__init__(f"row {row}, column {col!r}: {reason}: {content!r}")


class EmptyFile(SynthAuditError, ValueError):
    pass


class RaggedRow(SynthAuditError, ValueError):
    def __init__(self, row, expected, got):
        self.row = row
        super().__init__(f"row {row} has {got} fields, expected {expected}")


class NoNumericColumns(SynthAuditError, ValueError):
    pass


class EmptyColumn(SynthAuditError, ValueError):
    pass


class TooFewNumericColumns(SynthAuditError, ValueError):
    pass


class NoSharedColumns(SynthAuditError, ValueError):
    pass


class CategoryMismatch(SynthAuditError, ValueError):
    pass


class DomainError(SynthAuditError, ValueError):
    pass


class Unsupported(SynthAuditError, ValueError):
    pass


class DimensionMismatch(SynthAuditError, ValueError):
    pass


class ShapeMismatch(SynthAuditError, ValueError):
    pass


class NonFiniteLoss(SynthAuditError, FloatingPointError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class BadK(SynthAuditError, ValueError):
    pass


class DegenerateInput(SynthAuditError, ValueError):
    pass


class TooFewReferenceRows(SynthAuditError, ValueError):
    pass


class MissingLabels(SynthAuditError, ValueError):
    pass
