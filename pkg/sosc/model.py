# User value: This file turns a stream of demonstration points into a segmented skill model, one point at a time.
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from sosc import metrics
from sosc.contract import MODEL_KIND_PLAIN, NEW
from sosc.duration_hsmm import (
    HsmmView,
    StreamCursor,
    TransitionCounts,
    hsmm_costs,
    hsmm_loss,
    merge_durations,
    pick_assignment,
    update_duration,
    update_transitions,
)
from sosc.error_catalog import DataError
from sosc.gaussmath import Gaussian, Hyperparams
from sosc.subspace import (
    SubspaceCluster,
    mppca_loss,
    subspace_distance,
    update_basis,
    update_dim,
    update_prior_mean,
    update_priors,
    update_weight,
)

logger = logging.getLogger("sosc.model")

LOSS_SLACK = 1e-12


@dataclass(frozen=True)
class StepReport:
    t: int
    z: int
    is_new: bool
    K: int
    dim: int
    s: int
    mppca_before: float
    mppca_after: float
    hsmm_before: float
    hsmm_after: float
    merged: tuple[int, int] | None = None
    dim_guarded: bool = False


def _slack(value: float) -> float:
    return LOSS_SLACK * max(1.0, abs(value)) if math.isfinite(value) else 0.0


class SoscModel:
    """Online subspace clustering fused with an explicit-duration HSMM.

    Clusters are kept as per-frame views that share ids, priors, weights and
    duration statistics. The plain model has a single view.
    """

    kind = MODEL_KIND_PLAIN

    def __init__(
        self,
        D: int,
        hp: Hyperparams | None = None,
        *,
        n_views: int = 1,
        views: list[list[SubspaceCluster]] | None = None,
        counts: TransitionCounts | None = None,
        cursor: StreamCursor | None = None,
        next_id: int = 0,
    ):
        if D < 1:
            raise DataError("D must be positive")
        self.D = int(D)
        self.hp = hp or Hyperparams()
        self.views: list[list[SubspaceCluster]] = views if views is not None else [[] for _ in range(n_views)]
        self.counts = counts or TransitionCounts()
        self.cursor = cursor or StreamCursor()
        self.next_id = int(next_id)

    @property
    def clusters(self) -> list[SubspaceCluster]:
        return self.views[0]

    @property
    def K(self) -> int:
        return len(self.views[0])

    @property
    def P(self) -> int:
        return len(self.views)

    def index_of(self, cid: int) -> int:
        for i, c in enumerate(self.views[0]):
            if c.id == cid:
                return i
        raise KeyError(f"unknown cluster id {cid}")

    def ids(self) -> list[int]:
        return [c.id for c in self.views[0]]

    def total_dim(self) -> int:
        return int(sum(self.reported_dim(i) for i in range(self.K)))

    def reported_dim(self, index: int) -> int:
        return int(self.views[0][index].dim)

    def spatial_terms(self, xi: Sequence[float], index: int) -> tuple[int, float]:
        c = self.views[0][index]
        return int(c.dim), subspace_distance(xi, c, self.hp.b_m) ** 2

    def gaussians(self) -> list[Gaussian]:
        return [c.gaussian(self.hp.sigma2) for c in self.views[0]]

    def priors(self) -> np.ndarray:
        return np.array([c.prior for c in self.views[0]])

    def hsmm_view(self) -> HsmmView:
        return HsmmView(
            gaussians=tuple(self.gaussians()),
            priors=self.priors(),
            transitions=self.counts.probabilities(),
            dur_mu=np.array([c.duration.mu for c in self.views[0]]),
            dur_sigma=np.array([c.duration.sigma for c in self.views[0]]),
        )

    def snapshot(self) -> "SoscModel":
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone.views = [[c.copy() for c in view] for view in self.views]
        clone.counts = self.counts.copy()
        clone.cursor = self.cursor.copy()
        return clone

    def _validate_point(self, xi: Sequence[float]) -> np.ndarray:
        arr = np.asarray(xi, dtype=float).reshape(-1)
        if arr.shape[0] != self.D:
            raise DataError(f"point has dimension {arr.shape[0]}, model expects {self.D}")
        if not np.all(np.isfinite(arr)):
            raise DataError("point contains non-finite values")
        return arr

    def _assignment_dist2(self, xi: np.ndarray) -> np.ndarray:
        return np.array([self.spatial_terms(xi, i)[1] for i in range(self.K)])

    def _choose(self, xi: np.ndarray) -> tuple[int, np.ndarray]:
        if self.K == 0:
            return NEW, np.zeros(0)
        dist2 = self._assignment_dist2(xi)
        if self.cursor.z is None:
            return pick_assignment(dist2, self.hp.lam), dist2
        costs, new_cost = hsmm_costs(dist2, self.counts, self.index_of(self.cursor.z), self.hp)
        return pick_assignment(costs, new_cost), costs

    def _create(self, local_points: list[np.ndarray], t: int) -> int:
        cid = self.next_id
        self.next_id += 1
        for view, xi in zip(self.views, local_points):
            for c in view:
                update_weight(c, False, self.hp.weight_mode)
            view.append(SubspaceCluster.new(cid, xi, self.hp.weight_mode.w0))
            update_priors(view, len(view) - 1, t)
        self.counts.add_state()
        metrics.incr("clusters_created")
        logger.debug("cluster_created id=%s t=%s K=%s", cid, t, self.K)
        return len(self.views[0]) - 1

    def _update_assigned(self, index: int, local_points: list[np.ndarray], t: int) -> bool:
        hp = self.hp
        guarded = False
        for view, xi in zip(self.views, local_points):
            c = view[index]
            prev_dim = c.dim
            before = hp.lam1 * prev_dim + subspace_distance(xi, c, hp.b_m) ** 2

            mean_prev = update_prior_mean(view, index, xi, t)
            update_basis(c, xi, mean_prev, hp.sigma2)
            update_dim(c, xi, hp.lam1, hp.b_m)
            if c.dim != prev_dim:
                after = hp.lam1 * c.dim + subspace_distance(xi, c, hp.b_m) ** 2
                if after > before + _slack(before):
                    fallback = min(prev_dim, c.basis.shape[1])
                    logger.debug("dim_guarded id=%s proposed=%s kept=%s", c.id, c.dim, fallback)
                    c.dim = fallback
                    guarded = True
                else:
                    logger.debug("dim_changed id=%s from=%s to=%s", c.id, prev_dim, c.dim)
            c.trim()

            for i, other in enumerate(view):
                update_weight(other, i == index, hp.weight_mode)
        return guarded

    def _local_points(self, xi: np.ndarray) -> list[np.ndarray]:
        return [xi]

    def _merge_distance(self, a: int, b: int) -> float:
        return max(float(np.linalg.norm(view[a].mean - view[b].mean)) for view in self.views)

    # User value: collapses two clusters that drifted onto the same region so the model stays compact.
    def merge_clusters(self, id_i: int, id_j: int) -> tuple[int, int]:
        if id_i == id_j:
            raise DataError("cannot merge a cluster with itself")
        i, j = self.index_of(id_i), self.index_of(id_j)
        ci, cj = self.views[0][i], self.views[0][j]
        if ci.weight > cj.weight or (ci.weight == cj.weight and ci.id < cj.id):
            keep, drop = i, j
        else:
            keep, drop = j, i

        for view in self.views:
            survivor, absorbed = view[keep], view[drop]
            total = survivor.weight + absorbed.weight
            if total > 0.0:
                survivor.mean = (survivor.weight * survivor.mean + absorbed.weight * absorbed.mean) / total
            survivor.prior += absorbed.prior
            survivor.weight = total
            survivor.duration = merge_durations(survivor.duration, absorbed.duration)
        keep_id, drop_id = self.views[0][keep].id, self.views[0][drop].id

        self.counts.merge(keep, drop)
        for view in self.views:
            del view[drop]
        if self.cursor.z == drop_id:
            self.cursor.z = keep_id
        metrics.incr("clusters_merged")
        logger.debug("cluster_merged survivor=%s absorbed=%s K=%s", keep_id, drop_id, self.K)
        return keep_id, drop_id

    def _merge_scan(self, index: int) -> tuple[int, int] | None:
        for other in range(self.K):
            if other == index:
                continue
            if self._merge_distance(index, other) < self.hp.lam:
                return self.merge_clusters(self.views[0][index].id, self.views[0][other].id)
        return None

    def _step(self, xi: np.ndarray) -> tuple[int, StepReport]:
        t = self.cursor.t
        z_prev = self.cursor.z
        local_points = self._local_points(xi)

        choice, costs = self._choose(xi)
        if self.K == 0:
            mppca_before = hsmm_before = math.inf
        else:
            pre_index = choice if choice != NEW else int(np.argmin(costs))
            pre_id = self.views[0][pre_index].id
            mppca_before = mppca_loss(self, xi, pre_id)
            hsmm_before = hsmm_loss(self, xi, z_prev, pre_id)

        guarded = False
        is_new = choice == NEW
        if is_new:
            index = self._create(local_points, t)
        else:
            index = choice
            guarded = self._update_assigned(index, local_points, t)

        z = self.views[0][index].id
        if z_prev is None or z != z_prev:
            if z_prev is not None:
                prev_index = self.index_of(z_prev)
                update_transitions(self.counts, prev_index, index)
                for view in self.views:
                    update_duration(view[prev_index].duration, self.cursor.s)
            self.cursor.z = z
            self.cursor.s = 1
        else:
            self.cursor.s += 1

        mppca_after = mppca_loss(self, xi, z)
        hsmm_after = hsmm_loss(self, xi, z_prev, z)
        dim = self.reported_dim(index)

        merged = self._merge_scan(index)
        self.cursor.t = t + 1
        z_now = self.cursor.z
        report = StepReport(
            t=t,
            z=z_now,
            is_new=is_new,
            K=self.K,
            dim=dim,
            s=self.cursor.s,
            mppca_before=mppca_before,
            mppca_after=mppca_after,
            hsmm_before=hsmm_before,
            hsmm_after=hsmm_after,
            merged=merged,
            dim_guarded=guarded,
        )
        metrics.incr("points_observed")
        return z_now, report

    def observe(self, xi: Sequence[float]) -> tuple[int, StepReport]:
        return self._step(self._validate_point(xi))

    # User value: labels a point with its closest learned segment without changing the model.
    def predict(self, xi: Sequence[float]) -> int:
        arr = self._validate_point(xi)
        if self.K == 0:
            raise DataError("model has no clusters")
        return self.views[0][int(np.argmin(self._assignment_dist2(arr)))].id


def observe(model: SoscModel, xi: Sequence[float]) -> tuple[int, StepReport]:
    return model.observe(xi)


def merge_clusters(model: SoscModel, i: int, j: int) -> SoscModel:
    model.merge_clusters(i, j)
    return model

