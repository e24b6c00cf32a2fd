"""Exception types shared across the package.

Every error carries a short machine-readable ``code`` so that batch runners can
record failures in result files without parsing messages.
"""


class M2SError(Exception):
    code = "error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class InfeasibleParameters(M2SError, ValueError):
    code = "infeasible-m"


class BudgetExceeded(M2SError, ValueError):
    code = "budget-exceeded"


class DimensionMismatch(M2SError, ValueError):
    code = "length-mismatch"


class NonOptimalWitness(M2SError, ValueError):
    code = "non-optimal-witness"


class FormatError(M2SError, ValueError):
    """Malformed instance or configuration text."""

    code = "malformed"


class IntegrationError(M2SError, RuntimeError):
    code = "integration-failed"


class DegenerateInput(M2SError, ValueError):
    code = "degenerate-input"


class MissingMeasure(M2SError, KeyError):
    code = "missing-measure"

    def __str__(self):
        return self.args[0] if self.args else self.code
