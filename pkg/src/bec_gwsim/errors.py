"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the domain where a formula or chart is defined."""


class PreconditionError(ValueError):
    """A physics precondition of an operation is violated."""


class IntegrationError(RuntimeError):
    """The ODE integrator could not reach the requested accuracy."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class PlanningError(ValueError):
    """A requested Feshbach schedule cannot be realised.

    ``limit`` carries the largest admissible fractional field modulation.
    """

    def __init__(self, message, limit=None):
        super().__init__(message)
        self.limit = limit


class ScenarioError(ValueError):
    """Scenario file failed validation; ``field`` names the offending path."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
