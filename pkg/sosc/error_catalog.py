# User value: This file turns numerical and data failures into stable codes and exit statuses users can script against.
from __future__ import annotations

import json

from sosc.contract import EXIT_DATA, EXIT_NUMERICAL, EXIT_USAGE


class SoscError(Exception):
    """Base class for every failure raised by this package."""


class UsageError(SoscError):
    pass


class ConfigError(UsageError):
    pass


class DataError(SoscError):
    pass


class ModelFormatError(DataError):
    pass


class NumericalError(SoscError):
    pass


class GaussianError(NumericalError):
    pass


class ControlError(NumericalError):
    pass


# User value: maps any failure to a code and a message that says what to fix.
def classify_error(exc: Exception) -> tuple[str, str]:
    text = f"{exc}".strip()
    low = text.lower()

    if isinstance(exc, ConfigError):
        return ("CONFIG_INVALID", f"Configuration is invalid: {text}")
    if isinstance(exc, UsageError):
        return ("USAGE_INVALID", f"Command usage is invalid: {text}")
    if isinstance(exc, FileNotFoundError) or "no such file" in low:
        return ("INPUT_NOT_FOUND", "Input file was not found.")
    if isinstance(exc, ModelFormatError):
        return ("MODEL_FORMAT", f"Model file is not a valid model document: {text}")
    if isinstance(exc, (DataError, json.JSONDecodeError)):
        return ("DATA_MALFORMED", f"Input data is malformed: {text}")
    if isinstance(exc, ControlError):
        return ("CONTROL_FAILURE", f"Controller synthesis failed: {text}")
    if isinstance(exc, NumericalError) or "singular matrix" in low:
        return ("NUMERICAL_FAILURE", f"Numerical failure: {text}")
    return ("PROCESSING_FAILED", "Processing failed due to an internal error.")


def exit_code_for(code: str) -> int:
    code = str(code or "").upper()
    if code in {"USAGE_INVALID", "CONFIG_INVALID"}:
        return EXIT_USAGE
    if code in {"NUMERICAL_FAILURE", "CONTROL_FAILURE"}:
        return EXIT_NUMERICAL
    return EXIT_DATA
