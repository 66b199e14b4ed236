"""Exception types shared across the package."""


class InvalidSpec(ValueError):
    """A potential specification violates a positivity or domain constraint."""


class LayoutTooLarge(ValueError):
    """The explicit segment layout would exceed the configured segment cap."""


class DegenerateEnergy(ValueError):
    """E is too close to V for the direct sigma formulas; use the limit branch."""


class NonPhysicalMatrix(ValueError):
    """A transfer matrix does not conserve flux (|m22| < 1)."""


class DomainError(ValueError):
    pass


class InsufficientPoints(ValueError):
    pass
