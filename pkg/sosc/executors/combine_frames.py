# User value: This file re-targets a frame-based model to new object poses and writes the resulting Gaussians.
from __future__ import annotations

import logging

from sosc.config import RunConfig
from sosc.contract import MODEL_KIND_TP
from sosc.error_catalog import UsageError
from sosc.executors.common import load_model
from sosc.gaussmath import full_covariance
from sosc.streams import read_frames, write_json
from sosc.task_param import tp_combine

logger = logging.getLogger("sosc.executors.combine_frames")


def execute_combine_frames(config: RunConfig) -> dict:
    logger.info("executor_start executor=combine-frames model=%s frames=%s", config.model, config.frames)
    model = load_model(config.model)
    if model.kind != MODEL_KIND_TP:
        raise UsageError("combine-frames needs a task-parameterized model")
    gaussians = tp_combine(model, read_frames(config.frames))
    priors = model.priors()
    doc = [
        {
            "id": cid,
            "prior": float(prior),
            "mean": g.mean.tolist(),
            "covariance": full_covariance(g).reshape(-1).tolist(),
            "dim": int(g.dim),
        }
        for cid, prior, g in zip(model.ids(), priors, gaussians)
    ]
    write_json(config.output, doc)
    logger.info("combine_frames_completed K=%s", len(doc))
    return {"output": str(config.output), "K": len(doc)}
