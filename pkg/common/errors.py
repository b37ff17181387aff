"""
Error types for the Code Curator toolkit.

Every error carries the process exit code the CLI reports for it:
- 2: input errors (missing files, malformed records, bad parameters)
- 3: invariant violations detected while a stage is running
"""

from typing import Optional


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT_ERROR = 2
EXIT_INVARIANT_VIOLATION = 3


class CuratorError(Exception):
    """Base class for all toolkit errors."""

    exit_code = EXIT_FAILURE


class InputError(CuratorError, ValueError):
    """Raised for bad inputs: files, records, parameters or configuration."""

    exit_code = EXIT_INPUT_ERROR


class DatasetError(InputError):
    """A dataset file could not be parsed; carries the 1-based line number when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(InputError):
    """Configuration file or override failed validation."""


class InvariantViolation(CuratorError):
    """A postcondition was breached while computing a result."""

    exit_code = EXIT_INVARIANT_VIOLATION


class ScoringError(InvariantViolation):
    """A log-probability provider broke its contract for a sample."""

    def __init__(self, message: str, sample_id: Optional[int] = None):
        self.sample_id = sample_id
        if sample_id is not None:
            message = f"sample {sample_id}: {message}"
        super().__init__(message)


class StageError(CuratorError):
    """Wraps the cause of a failed pipeline stage together with the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", EXIT_FAILURE)
        super().__init__(f"stage {stage} failed: {cause}")
