"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class GrccError(Exception):
    """Base class for all package errors."""

    category = "internal"


class ParseError(GrccError):
    """Input text could not be tokenized or decoded."""

    category = "parse"

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class CaseError(GrccError):
    """Parsed data violates a semantic invariant.

    ``field`` is a dotted path such as ``branches[3].reactance``.
    """

    category = "parse"

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ConfigError(CaseError):
    pass


class NetworkError(GrccError):
    category = "assembly"


class AssemblyError(GrccError):
    category = "assembly"


class SolverError(GrccError):
    category = "solver"


class CertificationError(GrccError):
    category = "certification"
