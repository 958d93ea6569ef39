"""
Planning Errors
Exception hierarchy shared by the parser, simulator, metrics and selection
"""

from typing import Any, List, Optional


class PlanningError(Exception):
    """Base class for every structured plandiv failure"""

    def __init__(self, message: str, source: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.source = source

    def diagnostic(self) -> str:
        """One-line diagnostic, prefixed with the source when known"""
        if self.source:
            return f"{self.source}: {self.message}"
        return self.message

    def __str__(self) -> str:
        return self.diagnostic()


class PDDLSyntaxError(PlanningError):
    """Malformed PDDL or plan text, with a 1-based position"""

    def __init__(self, message: str, line: int = 0, column: int = 0, source: Optional[str] = None):
        super().__init__(message, source)
        self.line = line
        self.column = column

    def diagnostic(self) -> str:
        location = f"{self.line}:{self.column}: " if self.line else ""
        prefix = f"{self.source}:" if self.source else ""
        if prefix and location:
            return f"{prefix}{location}{self.message}"
        if prefix:
            return f"{prefix} {self.message}"
        return f"{location}{self.message}"


class UnsupportedRequirementError(PDDLSyntaxError):
    """Requirement flag outside :strips, :typing, :equality, :negative-preconditions"""


class UnsupportedGoalError(PDDLSyntaxError):
    """Goal that is not a conjunction of positive ground atoms"""


class UnsupportedFeatureError(PDDLSyntaxError):
    """ADL connective or effect outside the supported subset"""


class DomainValidationError(PDDLSyntaxError):
    """Undeclared or duplicate names, arity and typing problems"""


class PlanParseError(PDDLSyntaxError):
    """Plan line naming an unknown action or constant, or with the wrong arity"""


class GroundingError(PlanningError):
    """Argument/parameter type mismatch or violated static equality"""

    def __init__(self, message: str, step: Optional[int] = None, source: Optional[str] = None):
        super().__init__(message, source)
        self.step = step

    def diagnostic(self) -> str:
        step = f"step {self.step}: " if self.step is not None else ""
        prefix = f"{self.source}: " if self.source else ""
        return f"{prefix}{step}{self.message}"


class PreconditionError(GroundingError):
    """Action applied in a state that does not satisfy its preconditions"""

    def __init__(self, message: str, literal: Any = None, step: Optional[int] = None,
                 source: Optional[str] = None):
        super().__init__(message, step, source)
        self.literal = literal


class InvalidPlanError(PlanningError):
    """An operation that needs a valid plan received an invalid one"""

    def __init__(self, message: str, report: Any = None, source: Optional[str] = None):
        super().__init__(message, source)
        self.report = report


class SelectionError(PlanningError, ValueError):
    """Selection size or plan-set shape out of range"""


class AggregationError(PlanningError, ValueError):
    """Invalid metric weights"""


class PlanSetError(PlanningError):
    """Several plans failed; one diagnostic per failure"""

    def __init__(self, errors: List[PlanningError]):
        super().__init__(f"{len(errors)} plan(s) failed")
        self.errors = list(errors)

    def diagnostics(self) -> List[str]:
        return [error.diagnostic() for error in self.errors]

    def diagnostic(self) -> str:
        return "\n".join(self.diagnostics())


class UnknownMetricError(PlanningError, ValueError):
    """Metric id outside the supported set"""
