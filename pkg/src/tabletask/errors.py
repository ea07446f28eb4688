"""Exception hierarchy shared across the engine.

Every error that can cross a module boundary derives from EngineError so
the CLI can map failures onto its documented exit codes.
"""

from __future__ import annotations

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_BACKEND = 3
EXIT_INFEASIBLE = 4


class EngineError(Exception):
    """Base class for all engine failures."""

    exit_code = EXIT_VALIDATION


class UsageError(EngineError):
    """Bad invocation: unknown flag values, missing stage inputs caused by the caller."""

    exit_code = EXIT_USAGE


class ScenarioError(EngineError):
    """Problem with a scenario file. ``path`` points at the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.reason = message


class ScenarioParseError(ScenarioError):
    """The file is not well-formed structured text."""


class ScenarioSchemaError(ScenarioError):
    """A required field is missing or has the wrong shape."""


class ScenarioSemanticError(ScenarioError):
    """The file parses but violates a domain invariant (dangling uid, pre-satisfied goal, ...)."""


class CatalogError(EngineError):
    """Asset catalog could not be built, loaded, or is too small for the request."""


class GraphCycleError(EngineError):
    """The on/in support subgraph contains a cycle."""


class LayoutInfeasibleError(EngineError):
    """All placement rounds exhausted. ``diagnostics`` lists what starved each object."""

    exit_code = EXIT_INFEASIBLE

    def __init__(self, message: str, diagnostics: list[str] | None = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class BackendError(EngineError):
    """Text-completion backend failure."""

    exit_code = EXIT_BACKEND


class BackendTransportError(BackendError):
    """The backend was unreachable or answered with a transport-level error."""


class GenerationRetriesExhausted(BackendError):
    """Every generation attempt produced an invalid reply. Carries all diagnostics."""

    def __init__(self, diagnostics: list[str]):
        super().__init__(
            "generation retries exhausted after %d attempt(s): %s"
            % (len(diagnostics), "; ".join(diagnostics))
        )
        self.diagnostics = list(diagnostics)


class EvaluationError(EngineError):
    """Goal evaluation over inconsistent inputs (unknown uid, empty result set)."""


class SkillFault(EngineError):
    """A primitive skill was rejected. Recorded in the episode log, never applied."""


class OccupiedHandFault(SkillFault):
    pass


class EmptyHandFault(SkillFault):
    pass


class BlockedObjectFault(SkillFault):
    """Target object is supporting something else and cannot be picked."""


class OutOfReachFault(SkillFault):
    pass


class UnknownObjectFault(SkillFault):
    pass


class InvalidTargetFault(SkillFault):
    """Place target collides, leaves the table, or does not fit its support."""


class PolicyFault(SkillFault):
    """A policy could not produce a next skill (e.g. no feasible goal pose)."""


class ServiceConflictError(EngineError):
    """Optimistic-concurrency version mismatch or illegal curation transition."""
