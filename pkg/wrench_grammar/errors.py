"""
Exception hierarchy for the wrench grammar pipeline.

Each error class carries the process exit code the CLI returns when it
escapes a command handler:

    1  usage / configuration problems
    2  input data problems
    3  internal invariant violations
"""

from __future__ import annotations


class WrenchGrammarError(Exception):
    """Base class for all pipeline errors."""

    exit_code: int = 2


# ─── Usage ───────────────────────────────────────────────────────


class UsageError(WrenchGrammarError):
    """Bad flags, unknown profile names, invalid config files."""

    exit_code = 1


class InvalidThresholds(UsageError):
    """Gradient band thresholds violate 0 < eps < cut_small·g_max."""


class InvalidProfile(UsageError):
    """A synthetic task profile is malformed."""


class InsufficientTrials(UsageError):
    """Fewer trials than the evaluation split asks for."""


# ─── Data ────────────────────────────────────────────────────────


class DataError(WrenchGrammarError):
    """Input data cannot be processed."""

    exit_code = 2


class MalformedRow(DataError):
    """A trial CSV row is missing columns or holds non-numeric values."""

    def __init__(self, path: str, row: int, detail: str):
        self.path = path
        self.row = row
        self.detail = detail
        super().__init__(f"{path}: row {row}: {detail}")

    def __reduce__(self):
        return (self.__class__, (self.path, self.row, self.detail))


class NonMonotoneTime(DataError):
    """Timestamps repeat or go backwards."""


class MissingPhaseFile(DataError):
    """A trial has no phase sidecar next to it."""


class InvalidPhases(DataError):
    """Phase windows overlap, are out of order or have t_start >= t_end."""


class EmptyPhase(DataError):
    """A phase window holds fewer than two samples."""


class SeriesTooShort(DataError):
    """A series has fewer samples than the minimum segment window."""


class EmptyCorpus(DataError):
    """Threshold calibration received no slopes."""


class CalibrationDegenerate(DataError):
    """All calibration slopes are (numerically) zero."""


class EmptySequence(DataError):
    """A composition or behaviour step received no input units."""


class SingleClass(DataError):
    """Training data holds only one class."""


class DegenerateFeatures(DataError):
    """Every feature dimension has zero variance."""


class DimensionMismatch(DataError):
    """A feature vector does not match the model's input width."""


class UnknownClass(DataError):
    """A label outside the model's class set was supplied for training."""


class NothingEncoded(DataError):
    """A grammar directory holds no encoded trials."""


class UntrainedModel(DataError):
    """A model was used before it was trained."""


class UnfittedForest(UntrainedModel):
    """A Mondrian forest was queried before any sample was added."""


class ModelFormatError(DataError):
    """A model or grammar file has an unknown format or version."""


class EncodingError(DataError):
    """Encoding one (trial, axis, phase) series failed."""

    def __init__(self, trial_id: str, axis: str, phase: str, reason: str):
        self.trial_id = trial_id
        self.axis = axis
        self.phase = phase
        self.reason = reason
        super().__init__(f"trial {trial_id}, axis {axis}, phase {phase}: {reason}")

    def __reduce__(self):
        return (self.__class__, (self.trial_id, self.axis, self.phase, self.reason))


# ─── Invariants ──────────────────────────────────────────────────


class InvariantViolation(WrenchGrammarError):
    """An internal consistency check failed."""

    exit_code = 3
