"""Exception types shared across the package."""


class CapacityError(ValueError):
    """A requested computation exceeds the desk-scale capacity limits.

    Raised for window ends past 2^62, base-prime requests past 2^31,
    subset enumerations past 2^20, and similar hard resource walls.
    """


class ResolutionError(ValueError):
    """A quadrature step is too coarse for the integrand's oscillation."""


class UsageError(ValueError):
    """A CLI flag or library argument violates an operation's precondition."""
