# User value: This file sends each command to the executor that implements it.
import logging

from sosc.config import RunConfig
from sosc.error_catalog import UsageError
from sosc.executors.combine_frames import execute_combine_frames
from sosc.executors.evaluate import execute_eval
from sosc.executors.fit import execute_fit
from sosc.executors.generate import execute_generate
from sosc.executors.plan import execute_plan
from sosc.executors.shared import execute_shared

logger = logging.getLogger("sosc.orchestrator.router")

EXECUTORS = {
    "generate": execute_generate,
    "fit": execute_fit,
    "eval": execute_eval,
    "plan": execute_plan,
    "shared": execute_shared,
    "combine-frames": execute_combine_frames,
}


def resolve_executor(command: str):
    try:
        return EXECUTORS[command]
    except KeyError:
        raise UsageError(f"unknown command {command!r}") from None


def execute_command(config: RunConfig) -> dict:
    executor = resolve_executor(config.command)
    logger.info(
        "orchestrator_route_selected command=%s input=%s model=%s output=%s",
        config.command,
        config.input or "",
        config.model or "",
        config.output or "",
    )
    return executor(config)
