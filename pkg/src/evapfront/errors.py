"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration value is missing, unknown, or out of range."""


class ShapeError(ValueError):
    """Array arguments have inconsistent lengths."""


class GeometryError(ValueError):
    """Domain geometry is degenerate (endpoint ordering, Jacobian sign)."""


class PhaseDepletionError(RuntimeError):
    """A phase has thinned below the resolvable margin; the run must halt."""

    def __init__(self, message: str, *, step: int | None = None,
                 time: float | None = None, x_delta: float | None = None):
        super().__init__(message)
        self.step = step
        self.time = time
        self.x_delta = x_delta


class NumericalFailureError(RuntimeError):
    """A non-finite value appeared while assembling the right-hand side."""

    def __init__(self, message: str, *, term: str | None = None,
                 node: int | None = None, step: int | None = None):
        super().__init__(message)
        self.term = term
        self.node = node
        self.step = step


class AuditError(ValueError):
    """An energy-audit precondition does not hold for the supplied inputs."""
