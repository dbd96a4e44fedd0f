"""
Exception hierarchy for the simulator
Every error names the field, invariant or sweep point it is about
"""

from typing import Optional


class SimulationError(Exception):
    """Base class for all simulator errors"""

    def __init__(self, message: str, field: Optional[str] = None, invariant: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.field = field
        self.invariant = invariant

    def to_dict(self) -> dict:
        return {
            'error': type(self).__name__,
            'message': self.message,
            'field': self.field,
            'invariant': self.invariant,
        }

    def __reduce__(self):
        # subclass constructors differ; pickle by state
        return _rebuild_error, (type(self), self.args, self.__dict__.copy())


def _rebuild_error(cls, args, state):
    error = cls.__new__(cls)
    Exception.__init__(error, *args)
    error.__dict__.update(state)
    return error


class FloorPlanParseError(SimulationError):
    """Floor-plan document is not valid JSON"""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}", field='document')
        self.line = line
        self.column = column


class FloorPlanValidationError(SimulationError):
    def __init__(self, invariant: str, detail: str):
        super().__init__(f"{invariant}: {detail}", invariant=invariant)


class NoPathError(SimulationError):
    pass


class InvalidSpecError(SimulationError):
    def __init__(self, field: str, detail: str):
        super().__init__(f"invalid {field}: {detail}", field=field)


class UnknownPortalError(SimulationError):
    def __init__(self, device_id: str, portal_id: str):
        super().__init__(f"placement {device_id} references unknown portal {portal_id}",
                         field=f"placements.{device_id}")
        self.device_id = device_id
        self.portal_id = portal_id


class ModelValidationError(SimulationError):
    """Architecture model, configuration or energy model violates an invariant"""

    def __init__(self, type_name: str, field: str, detail: str):
        super().__init__(f"{type_name}.{field}: {detail}", field=field, invariant=type_name)
        self.type_name = type_name


class DomainError(SimulationError):
    pass


class ManifestError(SimulationError):
    def __init__(self, path: str, detail: str, field: Optional[str] = None):
        super().__init__(f"{path}: {detail}", field=field)
        self.path = path


class SweepPointError(SimulationError):
    """A single sweep point failed; wraps the original error with its coordinates"""

    def __init__(self, scenario: str, model: str, configuration: str, stage: str, cause: Exception):
        super().__init__(
            f"[{scenario} / {model} / {configuration}] {stage} failed: {cause}",
            field=getattr(cause, 'field', None),
            invariant=getattr(cause, 'invariant', None),
        )
        self.scenario = scenario
        self.model = model
        self.configuration = configuration
        self.stage = stage
        self.cause = cause

    def to_dict(self) -> dict:
        data = super().to_dict()
        data.update({
            'scenario': self.scenario,
            'model': self.model,
            'configuration': self.configuration,
            'stage': self.stage,
            'cause': type(self.cause).__name__,
        })
        return data
