"""Exception hierarchy.

Every error carries a stable ``code`` string so the command-line front end can
emit machine-readable failures.
"""


class PpresError(Exception):
    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class DomainError(PpresError, ValueError):
    code = "domain"


class InvalidGeometryError(DomainError):
    code = "invalid-geometry"


class GuardZoneError(DomainError):
    code = "guard-zone"


class EmptyWindowError(DomainError):
    code = "empty-window"


class DegenerateError(DomainError):
    code = "degenerate"


class ZeroDetuningError(DomainError):
    code = "zero-detuning"


class InsufficientSpanError(PpresError):
    code = "insufficient-span"


class FitFailedError(PpresError):
    code = "fit-failed"

    def __init__(self, message, best_residual=float("nan")):
        super().__init__(message)
        self.best_residual = best_residual

    def to_dict(self):
        d = super().to_dict()
        d["best_residual"] = self.best_residual
        return d


class RejectedFitError(PpresError):
    code = "rejected-fit"


class DegenerateDataError(PpresError):
    code = "degenerate-data"


class BracketError(PpresError):
    code = "bracket"


class OverlapError(PpresError):
    code = "non-overlapping-range"


class SchemaError(PpresError):
    code = "schema"

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column

    def to_dict(self):
        d = super().to_dict()
        d["row"] = self.row
        d["column"] = self.column
        return d


class ConfigError(PpresError):
    code = "config-parse"


class FileIOError(PpresError):
    code = "file-io"


class MissingSeriesError(PpresError):
    code = "missing-series"
