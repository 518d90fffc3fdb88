"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class BudgetExceeded(RuntimeError):
    """A solver issued more oracle queries than its allotted budget."""


class IntegrityError(RuntimeError):
    """An outcome that a well-formed oracle or counter can never produce."""
