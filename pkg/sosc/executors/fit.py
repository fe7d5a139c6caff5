# User value: This file runs a stream through the online learner and saves the model plus a per-step log.
from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable, Sequence

from sosc import metrics
from sosc.bench.generator import LabeledStream
from sosc.config import RunConfig
from sosc.contract import FIT_LOG_HEADER, MODEL_KIND_TP
from sosc.error_catalog import DataError, UsageError
from sosc.executors.common import load_model, save_model, static_frames
from sosc.gaussmath import Frame, Hyperparams
from sosc.model import SoscModel, StepReport
from sosc.streams import read_stream, write_csv
from sosc.task_param import TpSoscModel

logger = logging.getLogger("sosc.executors.fit")


def new_model(kind: str, D: int, hp: Hyperparams, stream: LabeledStream, frames: Sequence[Frame] | None) -> SoscModel:
    if kind != MODEL_KIND_TP:
        return SoscModel(D, hp)
    first = stream.frames[0] if stream.frames is not None else frames
    if first is None:
        raise UsageError("task-parameterized fitting needs frames on each line or a frames file")
    return TpSoscModel(D, len(first), hp)


# User value: feeds points one by one, exactly as they would arrive live.
def fit_stream(
    model: SoscModel,
    stream: LabeledStream,
    frames: Sequence[Frame] | None = None,
    on_step: Callable[[StepReport], None] | None = None,
) -> SoscModel:
    if stream.D != model.D:
        raise DataError(f"stream dimension {stream.D} does not match model dimension {model.D}")
    is_tp = model.kind == MODEL_KIND_TP
    if is_tp and stream.frames is None and frames is None:
        raise UsageError("task-parameterized fitting needs frames on each line or a frames file")
    for t in range(len(stream)):
        with metrics.timed("observe_ms"):
            if is_tp:
                point_frames = stream.frames[t] if stream.frames is not None else frames
                _, report = model.tp_observe(stream.points[t], point_frames)
            else:
                _, report = model.observe(stream.points[t])
        if on_step is not None:
            on_step(report)
    return model


def execute_fit(config: RunConfig) -> dict:
    logger.info("executor_start executor=fit input=%s resume=%s", config.input, config.resume)
    stream = read_stream(config.input)
    frames = static_frames(config)
    if config.resume:
        model = load_model(config.model)
        logger.info("fit_resumed t=%s K=%s", model.cursor.t, model.K)
    else:
        model = new_model(config.kind, stream.D, config.hyperparams, stream, frames)

    rows: list[tuple] = []
    fit_stream(model, stream, frames, lambda r: rows.append((r.t, r.z, r.K, r.dim, r.hsmm_after, r.s)))

    save_model(config.model, model)
    log_path = config.log or Path(config.model).with_suffix(".log.csv")
    write_csv(log_path, FIT_LOG_HEADER, rows)
    summary = {
        "model": str(config.model),
        "log": str(log_path),
        "points": len(stream),
        "t": model.cursor.t,
        "K": model.K,
        "metrics": metrics.snapshot()["counters"],
    }
    logger.info("fit_completed", extra=summary)
    return summary
