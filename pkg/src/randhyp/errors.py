"""Exception types shared across the package."""


class RandhypError(Exception):
    """Base class for all package errors."""


class ConfigurationError(RandhypError):
    """Invalid system description or parameters.

    Carries the full list of validation messages so callers can report
    every problem at once instead of the first one found.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ContractError(RandhypError):
    """A call violated an operation precondition (e.g. dimension mismatch)."""


class UnsupportedOperationError(RandhypError):
    """The operation is not defined for this system (e.g. inverting a covering map)."""


class WindowLimitError(RandhypError):
    """A symbol position beyond the supported two-sided window was requested."""


class CocycleOverflowError(RandhypError):
    """Raw matrix products overflowed; use the log-space estimators instead."""
