"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input data violates a documented contract (bad file, bad levels, bad labels)."""


class InfeasibilityError(RuntimeError):
    """A requested configuration cannot be realized (split, table search, sampling)."""
