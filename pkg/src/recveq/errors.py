class RecveqError(Exception):
    """Base class for all errors raised by recveq."""


class ParseError(RecveqError):
    def __init__(self, message, line, col):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class FrontendError(RecveqError):
    """Static check failure; ``name`` is the offending identifier."""

    def __init__(self, name, detail=""):
        msg = f"{type(self).__name__}({name!r})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.name = name


class UndefinedCallee(FrontendError):
    pass


class UndefinedVariable(FrontendError):
    pass


class ArityMismatch(FrontendError):
    pass


class MissingReturn(FrontendError):
    pass


class DuplicateFunction(FrontendError):
    pass


class MutualRecursionUnsupported(FrontendError):
    pass


class ReservedIdentifier(FrontendError):
    pass


class UnsupportedConstruct(FrontendError):
    pass


class FreeVariable(FrontendError):
    pass


class PathBudgetExceeded(RecveqError):
    def __init__(self, limit):
        super().__init__(f"path budget of {limit} exceeded")
        self.limit = limit


class BudgetExceeded(RecveqError):
    """A solver ran out of its time or conflict budget."""


class WidthOverflowUnsupported(RecveqError):
    pass


class NotFlat(RecveqError):
    """A program handed to the flat encoder still recurses."""


class InconsistentWitness(RecveqError):
    pass
