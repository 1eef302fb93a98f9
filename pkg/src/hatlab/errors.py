class HatlabError(Exception):
    """Base class for all errors raised by hatlab."""


class InvalidInputError(HatlabError, ValueError):
    pass


class PreconditionError(HatlabError, ValueError):
    pass


class DegenerateSpikeError(HatlabError, ValueError):
    pass


class NumericFailure(HatlabError, RuntimeError):
    """A numerical procedure did not converge within its budget.

    ``bracket`` carries the best (lower, upper) enclosure reached, when one
    is available.
    """

    def __init__(self, message, bracket=None, diagnostics=None):
        super().__init__(message)
        self.bracket = bracket
        self.diagnostics = diagnostics or {}
