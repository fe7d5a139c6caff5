# User value: This file decodes which segment should be active at each future step and turns that into a reference to track.
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from sosc.duration_hsmm import forward
from sosc.error_catalog import DataError, GaussianError
from sosc.gaussmath import Frame, full_covariance

logger = logging.getLogger("sosc.control.planning")


@dataclass(frozen=True, eq=False)
class StepwiseReference:
    """Piecewise-constant targets ``(means[t], covs[t])`` plus the decoded cluster ids."""

    means: np.ndarray
    covs: np.ndarray
    states: np.ndarray

    def __post_init__(self) -> None:
        means = np.atleast_2d(np.asarray(self.means, dtype=float))
        covs = np.asarray(self.covs, dtype=float)
        states = np.asarray(self.states, dtype=np.int64).reshape(-1)
        T, m = means.shape
        if T < 1:
            raise DataError("reference needs at least one step")
        if covs.shape != (T, m, m):
            raise DataError(f"reference covariances must have shape ({T}, {m}, {m})")
        if states.shape[0] != T:
            raise DataError("reference states must have one entry per step")
        for t in range(T):
            try:
                np.linalg.cholesky(covs[t])
            except np.linalg.LinAlgError as exc:
                raise GaussianError(f"reference covariance at t={t} is not positive definite") from exc
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return int(self.means.shape[0])

    @property
    def m(self) -> int:
        return int(self.means.shape[1])


# User value: lets the robot carry on the skill on its own from wherever the operator let go.
def plan_autonomous(
    model,
    xi_t0: Sequence[float],
    T: int,
    s_max: int,
    out_idx: Sequence[int] | None = None,
    frames: Sequence[Frame] | None = None,
    in_idx: Sequence[int] | None = None,
) -> StepwiseReference:
    """Decode the most likely cluster per step after observing ``xi_t0``.

    ``xi_t0`` covers ``in_idx`` when given, else every model dimension. The
    reference holds the ``out_idx`` block of each decoded cluster.
    """
    if model.K == 0:
        raise DataError("cannot plan with an empty model")
    if in_idx is None:
        xi_t0 = model._validate_point(xi_t0)
    else:
        in_idx = [int(i) for i in in_idx]
        xi_t0 = np.asarray(xi_t0, dtype=float).reshape(-1)
        if xi_t0.shape[0] != len(in_idx) or not np.all(np.isfinite(xi_t0)):
            raise DataError(f"initial observation must hold {len(in_idx)} finite values")
    view = model.hsmm_view(frames) if frames is not None else model.hsmm_view()
    alpha = forward(view, T, s_max, observations=[xi_t0], obs_idx=in_idx)
    winners = np.argmax(alpha, axis=1)

    idx = np.arange(model.D) if out_idx is None else np.asarray(list(out_idx), dtype=int)
    block = np.ix_(idx, idx)
    means = np.array([view.gaussians[i].mean[idx] for i in winners])
    covs = np.array([full_covariance(view.gaussians[i])[block] for i in winners])
    ids = model.ids()
    states = np.array([ids[i] for i in winners], dtype=np.int64)
    switches = int(np.count_nonzero(np.diff(winners))) if T > 1 else 0
    logger.info("plan_decoded T=%s K=%s switches=%s first=%s", T, model.K, switches, int(states[0]))
    return StepwiseReference(means, covs, states)
