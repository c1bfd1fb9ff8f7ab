"""Exception hierarchy shared by all engines."""


class DBExplainError(Exception):
    """Base class; ``module`` names the engine that raised it."""

    module = "dbexplain"

    def __str__(self):
        return f"{self.module}: {super().__str__()}"


class LoadError(DBExplainError):
    module = "relational-core"


class SchemaError(DBExplainError):
    module = "relational-core"


class ParseError(DBExplainError):
    module = "query-lang"

    def __init__(self, message, line=None, col=None):
        if line is not None:
            message = f"{message} at line {line}, column {col}"
        super().__init__(message)
        self.line = line
        self.col = col


class QueryError(DBExplainError):
    module = "query-lang"


class CapExceeded(DBExplainError):
    """Raised when an exhaustive search would exceed its hard size cap."""

    module = "dbexplain"

    def __init__(self, message, module=None):
        super().__init__(message)
        if module is not None:
            self.module = module


class PreconditionError(DBExplainError):
    def __init__(self, message, module="dbexplain"):
        super().__init__(message)
        self.module = module
