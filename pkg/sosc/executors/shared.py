# User value: This file corrects a noisy operator trajectory with the learned skill and simulates the blended motion.
from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from sosc.config import RunConfig
from sosc.contract import shared_header
from sosc.control.lqr import DoubleIntegrator, default_R, lqr_control, lqr_infinite, state_weight
from sosc.control.regression import shared_control_step
from sosc.error_catalog import UsageError
from sosc.executors.common import load_model, required_frames
from sosc.gaussmath import Gaussian
from sosc.streams import read_stream, write_csv

logger = logging.getLogger("sosc.executors.shared")


def control_blocks(D: int, m: int, in_idx, out_idx) -> tuple[list[int], list[int]]:
    """Defaults: the operator drives the first ``m`` dims and the next ``m`` are predicted."""
    if in_idx is not None and out_idx is not None:
        return list(in_idx), list(out_idx)
    if D != 2 * m:
        raise UsageError(f"model has {D} dims; give in_idx and out_idx for a {m}-dim operator")
    return list(range(m)), list(range(m, 2 * m))


# User value: steps a point mass toward each desired state, as a follower robot would.
def shared_rollout(
    gaussians: Sequence[Gaussian],
    priors: np.ndarray,
    operator: np.ndarray,
    in_idx: Sequence[int],
    out_idx: Sequence[int],
    kappa2: float,
    system: DoubleIntegrator,
    R: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    m = system.m
    T = operator.shape[0]
    desired = np.zeros((T, m))
    states = np.zeros((T, 2 * m))
    x = np.concatenate([operator[0], np.zeros(m)])
    for t in range(T):
        target = shared_control_step(gaussians, priors, in_idx, out_idx, operator[t], kappa2)
        gains = lqr_infinite(system, state_weight(target), R)
        u = lqr_control(gains, np.concatenate([target.mean, np.zeros(m)]), x)
        x = system.step(x, u)
        desired[t] = target.mean
        states[t] = x
    return desired, states


def execute_shared(config: RunConfig) -> dict:
    logger.info("executor_start executor=shared model=%s input=%s", config.model, config.input)
    model = load_model(config.model)
    frames = required_frames(model, config)
    operator = read_stream(config.input).points
    m = operator.shape[1]
    in_idx, out_idx = control_blocks(model.D, m, config.in_idx, config.out_idx)
    if len(in_idx) != m:
        raise UsageError(f"operator trajectory has {m} dims but in_idx names {len(in_idx)}")

    gaussians = model.gaussians(frames) if frames is not None else model.gaussians()
    system = DoubleIntegrator(m, config.dt)
    desired, states = shared_rollout(
        gaussians,
        model.priors(),
        operator,
        in_idx,
        out_idx,
        config.hyperparams.kappa2,
        system,
        default_R(m, config.r_scale),
    )

    rows = ([t, *operator[t], *desired[t], *states[t]] for t in range(len(operator)))
    write_csv(config.output, shared_header(m), rows)
    summary = {
        "output": str(config.output),
        "T": int(operator.shape[0]),
        "mean_correction": float(np.mean(np.linalg.norm(desired - operator, axis=1))),
        "final_state": states[-1, :m].tolist(),
    }
    logger.info("shared_completed", extra=summary)
    return summary
