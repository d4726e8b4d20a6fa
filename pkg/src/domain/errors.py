"""
Exception hierarchy shared by every layer.

Each exception class maps onto one CLI exit code.
"""


class WscError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ParameterError(WscError, ValueError):
    """A parameter or input violates a documented constraint."""

    exit_code = 1


class CodebookFormatError(ParameterError):
    """A codebook file does not follow the v1 text format."""


class BudgetExceededError(WscError):
    """An enumeration would exceed the caller-supplied budget."""

    exit_code = 2

    def __init__(self, what: str, required: int, budget: int):
        self.what = what
        self.required = required
        self.budget = budget
        super().__init__(
            f"{what}: {required} items required but the budget is {budget} "
            f"(raise --max-signals to allow the scan)"
        )


class ConstructionError(WscError):
    """Rejection sampling did not produce a code with the requested distance."""

    exit_code = 3

    def __init__(self, message: str, attempts: int = 0):
        self.attempts = attempts
        super().__init__(message)
