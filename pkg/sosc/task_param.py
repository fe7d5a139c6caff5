# User value: This file lets a learned skill adapt to new object poses by learning it in several coordinate frames.
from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from sosc.contract import MODEL_KIND_TP
from sosc.duration_hsmm import HsmmView
from sosc.error_catalog import DataError, UsageError
from sosc.gaussmath import Frame, Gaussian, Hyperparams, product, transform
from sosc.model import SoscModel, StepReport
from sosc.subspace import gaussian_distance

logger = logging.getLogger("sosc.task_param")


class TpSoscModel(SoscModel):
    """SOSC learned in P frames at once; cluster i has one local Gaussian per frame."""

    kind = MODEL_KIND_TP

    def __init__(self, D: int, P: int, hp: Hyperparams | None = None, **kwargs):
        if P < 1:
            raise DataError("P must be at least 1")
        kwargs.setdefault("n_views", P)
        super().__init__(D, hp, **kwargs)
        if self.P != P:
            raise DataError(f"expected {P} frame views, got {self.P}")
        self._frames: list[Frame] | None = None

    def _check_frames(self, frames: Sequence[Frame]) -> list[Frame]:
        frames = list(frames)
        if len(frames) != self.P:
            raise DataError(f"expected {self.P} frames, got {len(frames)}")
        for f in frames:
            if f.D != self.D:
                raise DataError(f"frame dimension {f.D} does not match model dimension {self.D}")
        return frames

    def _active_frames(self) -> list[Frame]:
        if self._frames is None:
            raise UsageError("no frames set; call tp_observe or pass frames explicitly")
        return self._frames

    def combined(self, index: int, frames: Sequence[Frame]) -> Gaussian:
        sigma2 = self.hp.sigma2
        return product(transform(view[index].gaussian(sigma2), f) for view, f in zip(self.views, frames))

    def reported_dim(self, index: int) -> int:
        return int(min(view[index].dim for view in self.views))

    def spatial_terms(self, xi: Sequence[float], index: int) -> tuple[int, float]:
        g = self.combined(index, self._active_frames())
        return int(g.dim), gaussian_distance(xi, g, self.hp.b_m) ** 2

    def _local_points(self, xi: np.ndarray) -> list[np.ndarray]:
        return [f.to_local(xi) for f in self._active_frames()]

    def gaussians(self, frames: Sequence[Frame] | None = None) -> list[Gaussian]:
        frames = self._check_frames(frames) if frames is not None else self._active_frames()
        return [self.combined(i, frames) for i in range(self.K)]

    def hsmm_view(self, frames: Sequence[Frame] | None = None) -> HsmmView:
        shared = self.views[0]
        return HsmmView(
            gaussians=tuple(self.gaussians(frames)),
            priors=self.priors(),
            transitions=self.counts.probabilities(),
            dur_mu=np.array([c.duration.mu for c in shared]),
            dur_sigma=np.array([c.duration.sigma for c in shared]),
        )

    def observe(self, xi: Sequence[float]) -> tuple[int, StepReport]:
        raise UsageError("task-parameterized models observe through tp_observe(xi, frames)")

    # User value: learns from one point seen through the current object frames.
    def tp_observe(self, xi: Sequence[float], frames: Sequence[Frame]) -> tuple[int, StepReport]:
        arr = self._validate_point(xi)
        self._frames = self._check_frames(frames)
        return self._step(arr)

    def predict(self, xi: Sequence[float], frames: Sequence[Frame] | None = None) -> int:
        if frames is not None:
            self._frames = self._check_frames(frames)
        return super().predict(xi)


def tp_observe(model: TpSoscModel, xi: Sequence[float], frames: Sequence[Frame]) -> tuple[int, StepReport]:
    return model.tp_observe(xi, frames)


# User value: re-targets every learned segment to new object poses for reproduction.
def tp_combine(model: TpSoscModel, new_frames: Sequence[Frame]) -> list[Gaussian]:
    frames = model._check_frames(new_frames)
    return [model.combined(i, frames) for i in range(model.K)]
