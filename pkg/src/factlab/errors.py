"""Exception taxonomy shared across the package.

Every error raised by factlab derives from :class:`FactLabError` so callers
can catch the whole family with one clause. Errors that carry structured
context (failing solver, offending row, mismatching subset) expose it as
attributes in addition to the message.
"""

from __future__ import annotations


class FactLabError(Exception):
    """Base class for all factlab errors."""


# --- pipeline engine ---------------------------------------------------


class RegistrationError(FactLabError):
    """A solver descriptor is malformed (missing stage, name, or IO names)."""


class ConfigParseError(FactLabError):
    """A pipeline config does not parse or violates the config schema."""


class UnknownSolverError(FactLabError):
    """A config names a solver that is not registered."""


class ChainMismatchError(FactLabError):
    """Adjacent solvers disagree on their shared value name."""

    def __init__(self, position: int, output_name: str, input_name: str):
        self.position = position
        self.output_name = output_name
        self.input_name = input_name
        super().__init__(
            f"chain mismatch at solver {position}: previous output "
            f"{output_name!r} != input {input_name!r}"
        )


class MissingInputError(FactLabError):
    """The start solver's input is absent from the initial state."""


class StateInvariantError(FactLabError):
    """A state write broke a FactState invariant."""


class SolverFailure(FactLabError):
    """A solver reported success=False; carries the partial state."""

    def __init__(self, name: str, stage: str, message: str, state=None):
        self.name = name
        self.stage = stage
        self.message = message
        self.state = state
        super().__init__(f"solver {name!r} (stage {stage}) failed: {message}")


# --- solvers -----------------------------------------------------------


class BackendError(FactLabError):
    """A text-generation backend could not produce output."""


class DecompositionParseError(FactLabError):
    """LLM claim decomposition returned no parseable claims."""


class CredentialError(FactLabError):
    """A required provider credential is not configured."""


class RetrievalError(FactLabError):
    """A remote retrieval failed after the bounded retries."""

    def __init__(self, message: str, attempts: list[str] | None = None):
        self.attempts = attempts or []
        detail = "; ".join(self.attempts)
        super().__init__(f"{message}{f' (attempts: {detail})' if detail else ''}")


class EmptyVoteError(FactLabError):
    """majority_vote was called with an empty stance list."""


class VerdictParseError(FactLabError):
    """A verifier backend's output did not match the verdict grammar."""


# --- evaluation harnesses ----------------------------------------------


class ManifestSchemaError(FactLabError):
    """A dataset manifest row or header violates the manifest schema."""


class ManifestCountError(FactLabError):
    """Manifest record counts disagree with the declared counts."""

    def __init__(self, subset: str, message: str):
        self.subset = subset
        super().__init__(message)


class CsvFormatError(FactLabError):
    """An uploaded CSV is structurally malformed."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(message if row is None else f"row {row}: {message}")


class UnknownQuestionError(FactLabError):
    """A response row references a question id absent from the manifest."""


class DuplicateRowError(FactLabError):
    """An uploaded CSV contains the same id twice."""


class JudgeParseError(FactLabError):
    """A judge backend's output did not match the correct/incorrect grammar."""


class EmptyEvaluationError(FactLabError):
    """An evaluation produced zero evaluated rows."""


class UnknownClaimError(FactLabError):
    """A verdict row references a claim id absent from the gold set."""

    def __init__(self, ids: list[str]):
        self.ids = list(ids)
        super().__init__(f"unknown claim ids: {', '.join(self.ids)}")


class VerdictFormatError(FactLabError):
    """A verdict CSV cell holds an invalid label token."""

    def __init__(self, row: int, token: str):
        self.row = row
        self.token = token
        super().__init__(f"row {row}: invalid verdict token {token!r}")


class NoBinaryGoldError(FactLabError):
    """Metrics were requested on rows whose gold labels are all Unknown."""
