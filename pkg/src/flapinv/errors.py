"""Exception hierarchy shared by all modules."""


class FlapinvError(Exception):
    """Base class; ``payload`` is a JSON-serializable description."""

    code = "error"

    def __init__(self, message, **payload):
        super().__init__(message)
        self.payload = payload

    def to_dict(self):
        out = {"error": self.code, "message": str(self)}
        out.update({k: v for k, v in self.payload.items()})
        return out


class VariableMismatch(FlapinvError):
    code = "variable-mismatch"


class DomainError(FlapinvError):
    """Inputs outside the operation's domain (empty region, no real root, ...)."""

    code = "domain"


class TruncationError(FlapinvError):
    code = "insufficient-truncation"


class ConvergenceError(FlapinvError):
    code = "non-convergence"


class ChartEscape(FlapinvError):
    code = "chart-escape"


class HypothesisViolated(FlapinvError):
    code = "hypothesis-violated"
