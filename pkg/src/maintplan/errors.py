"""Exception hierarchy shared by all planner stages."""


class PlannerError(Exception):
    """Base class for every error raised by maintplan."""


class InputError(PlannerError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


class SchemaError(InputError):
    """A file does not conform to its exchange schema."""

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{position}: {message}"
        super().__init__(message)


class ValidationError(InputError):
    """A structurally valid document violates a model invariant."""


class UnknownComponent(InputError):
    def __init__(self, component):
        self.component = component
        super().__init__(f"unknown component {component!r}")


class UnsupportedGeometry(PlannerError):
    pass


class MixedSpheres(PlannerError):
    pass


class PreconditionMismatch(PlannerError):
    pass


class NoRule(PlannerError):
    pass


class NoTool(PlannerError):
    pass


class NoPlan(PlannerError):
    """No removable component is left before the target is freed."""


class EmptyProblem(InputError):
    pass


class TooLarge(InputError):
    pass


class MissingPose(InputError):
    pass


class EmptyRegion(PlannerError):
    pass


class OutOfBounds(PlannerError):
    pass


class DimensionMismatch(InputError):
    pass


class InvalidStart(InputError):
    pass


class InvalidGoal(InputError):
    pass


class ValidationFailed(PlannerError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"program failed validation: {lines}")
