# User value: This file plans an autonomous continuation of the skill and rolls it out on a simulated point mass.
from __future__ import annotations

import logging

import numpy as np

from sosc.config import RunConfig
from sosc.contract import plan_header
from sosc.control.lqr import DoubleIntegrator, default_R, lqt_finite
from sosc.control.planning import plan_autonomous
from sosc.executors.common import load_model, required_frames
from sosc.streams import write_csv

logger = logging.getLogger("sosc.executors.plan")


def start_position(x0, in_idx, out_idx, D: int) -> np.ndarray | None:
    """Initial position on the output block when ``x0`` observes all of it."""
    observed = list(range(D)) if in_idx is None else list(in_idx)
    out = list(range(D)) if out_idx is None else list(out_idx)
    if not set(out) <= set(observed):
        return None
    lookup = dict(zip(observed, x0))
    return np.array([lookup[i] for i in out], dtype=float)


def execute_plan(config: RunConfig) -> dict:
    logger.info("executor_start executor=plan model=%s T=%s", config.model, config.horizon)
    model = load_model(config.model)
    frames = required_frames(model, config)
    ref = plan_autonomous(
        model,
        config.x0,
        config.horizon,
        config.s_max,
        out_idx=config.out_idx,
        frames=frames,
        in_idx=config.in_idx,
    )
    m = ref.m
    system = DoubleIntegrator(m, config.dt)
    x0 = start_position(config.x0, config.in_idx, config.out_idx, model.D)
    rollout = lqt_finite(system, ref, default_R(m, config.r_scale), x0=x0)

    rows = (
        [t, int(ref.states[t]), *ref.means[t], *rollout.states[t], *rollout.controls[t]]
        for t in range(len(ref))
    )
    write_csv(config.output, plan_header(m), rows)

    final = rollout.states[-1, :m]
    summary = {
        "output": str(config.output),
        "T": len(ref),
        "states": sorted({int(z) for z in ref.states}),
        "switches": int(np.count_nonzero(np.diff(ref.states))),
        "terminal_error": float(np.linalg.norm(final - ref.means[-1])),
    }
    logger.info("plan_completed", extra=summary)
    return summary
