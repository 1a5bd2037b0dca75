"""Exception types shared across the package.

The CLI maps these onto exit codes: config errors exit 2, numeric errors
exit 3, statistical verification failures exit 4.
"""


class CoagFragError(Exception):
    """Base class for all package errors."""


class DomainError(CoagFragError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NumericError(CoagFragError, ArithmeticError):
    """A numeric routine failed to converge or exhausted its budget.

    Carries optional diagnostic context (e.g. the tolerance actually
    achieved by a quadrature, or the acceptance rate of a rejection
    sampler) so callers can report what went wrong.
    """

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = dict(context)

    def __str__(self):
        base = super().__str__()
        if self.context:
            detail = ", ".join(f"{k}={v!r}" for k, v in sorted(self.context.items()))
            return f"{base} ({detail})"
        return base


class ConfigError(CoagFragError, ValueError):
    """An experiment or CLI configuration is invalid."""


class StatisticalFailure(CoagFragError):
    """A verification run finished but one or more tests did not pass."""
