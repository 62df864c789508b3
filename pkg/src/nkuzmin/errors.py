"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the map or measure."""


class BudgetExceeded(RuntimeError):
    """A word enumeration would exceed the configured budget."""

    def __init__(self, message, needed=None, budget=None):
        super().__init__(message)
        self.needed = needed
        self.budget = budget


class DegenerateFit(ValueError):
    """A rate fit has too few usable points."""
