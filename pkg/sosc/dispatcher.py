# User value: This file is the single entry point from a checked config to a finished command.
from sosc.config import RunConfig
from sosc.error_catalog import UsageError
from sosc.orchestrator.router import execute_command


def dispatch(config: RunConfig) -> dict:
    if not config.command:
        raise UsageError("command missing in run config")
    return execute_command(config)
