# User value: This file holds the model and frame loading every command shares.
from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

from sosc import persistence
from sosc.config import RunConfig
from sosc.contract import MODEL_KIND_TP
from sosc.error_catalog import UsageError
from sosc.gaussmath import Frame
from sosc.model import SoscModel
from sosc.streams import read_frames

logger = logging.getLogger("sosc.executors")


def load_model(path: Path) -> SoscModel:
    model = persistence.load(Path(path).read_bytes())
    logger.debug("model_loaded path=%s kind=%s K=%s", path, model.kind, model.K)
    return model


def save_model(path: Path, model: SoscModel) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(persistence.save(model))


def static_frames(config: RunConfig) -> tuple[Frame, ...] | None:
    return read_frames(config.frames) if config.frames is not None else None


def required_frames(model: SoscModel, config: RunConfig) -> Sequence[Frame] | None:
    """Frames for read-only use of a model; plain models need none."""
    if model.kind != MODEL_KIND_TP:
        return None
    frames = static_frames(config)
    if frames is None:
        raise UsageError("a task-parameterized model needs a frames file")
    return frames
