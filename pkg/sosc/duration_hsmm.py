# User value: This file models how long each motion segment lasts and which segment follows, so plans keep the demonstrated rhythm.
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from sosc.contract import NEW
from sosc.error_catalog import DataError, NumericalError
from sosc.gaussmath import Gaussian, Hyperparams, log_density
from sosc.subspace import DURATION_FLOOR, DurationStats, assign_dp, subspace_distance

DURATION_MIN_VARIANCE = 1e-6


def _variance_or_floor(e: float, n: int) -> float:
    if n <= 1:
        return DURATION_FLOOR
    value = e / (n - 1)
    return value if value >= DURATION_MIN_VARIANCE else DURATION_FLOOR


# User value: keeps the expected dwell of a segment current after every completed visit.
def update_duration(stats: DurationStats, s_completed: int) -> DurationStats:
    s = float(s_completed)
    mu_old = stats.mu
    stats.mu = mu_old + (s - mu_old) / (stats.n + 1)
    stats.e = stats.e + (s - mu_old) * (s - stats.mu)
    stats.n += 1
    stats.sigma = _variance_or_floor(stats.e, stats.n)
    return stats


def merge_durations(a: DurationStats, b: DurationStats) -> DurationStats:
    """Pooled Welford combination of two dwell histories."""
    n = a.n + b.n
    if n == 0:
        return DurationStats()
    if a.n == 0:
        return b.copy()
    if b.n == 0:
        return a.copy()
    delta = b.mu - a.mu
    mu = (a.n * a.mu + b.n * b.mu) / n
    e = a.e + b.e + delta * delta * a.n * b.n / n
    return DurationStats(mu, _variance_or_floor(e, n), e, n)


@dataclass
class TransitionCounts:
    counts: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))

    def __post_init__(self) -> None:
        arr = np.array(self.counts, dtype=np.int64)
        self.counts = arr if arr.size else np.zeros((0, 0), dtype=np.int64)

    @property
    def K(self) -> int:
        return int(self.counts.shape[0])

    def copy(self) -> "TransitionCounts":
        return TransitionCounts(self.counts.copy())

    def add_state(self) -> None:
        K = self.K
        grown = np.zeros((K + 1, K + 1), dtype=np.int64)
        grown[:K, :K] = self.counts
        self.counts = grown

    def row_total(self, i: int) -> int:
        return int(self.counts[i].sum())

    def row_probs(self, i: int) -> np.ndarray | None:
        total = self.row_total(i)
        if total == 0:
            return None
        return self.counts[i] / total

    def prob(self, i: int, j: int) -> float:
        total = self.row_total(i)
        return 0.0 if total == 0 else float(self.counts[i, j]) / total

    def probabilities(self) -> np.ndarray:
        """Row-stochastic matrix; rows never left are all zero."""
        totals = self.counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            probs = np.where(totals > 0, self.counts / np.maximum(totals, 1), 0.0)
        return probs

    def distinct_out(self, i: int) -> int:
        return int(np.count_nonzero(self.counts[i]))

    def merge(self, keep: int, drop: int) -> None:
        c = self.counts.copy()
        c[keep, :] += c[drop, :]
        c[:, keep] += c[:, drop]
        c[keep, keep] = 0
        c = np.delete(np.delete(c, drop, axis=0), drop, axis=1)
        self.counts = c


@dataclass
class StreamCursor:
    t: int = 0
    z: int | None = None
    s: int = 0

    def copy(self) -> "StreamCursor":
        return StreamCursor(self.t, self.z, self.s)

    def to_dict(self) -> dict:
        return {"t": int(self.t), "z": None if self.z is None else int(self.z), "s": int(self.s)}

    @classmethod
    def from_dict(cls, raw: dict) -> "StreamCursor":
        z = raw.get("z")
        return cls(int(raw["t"]), None if z is None else int(z), int(raw["s"]))


# User value: records one observed switch between segments.
def update_transitions(counts: TransitionCounts, i_prev: int, i_new: int) -> np.ndarray:
    if i_prev == i_new:
        raise DataError("self-transition is a dwell, not a transition")
    counts.counts[i_prev, i_new] += 1
    return counts.row_probs(i_prev)


def _pseudo_log(counts: TransitionCounts, i: int) -> float:
    return -math.log(counts.row_total(i) + 1.0)


def hsmm_costs(dist2: np.ndarray, counts: TransitionCounts, z_index: int, hp: Hyperparams) -> tuple[np.ndarray, float]:
    """Per-cluster assignment costs and the cost of opening a new cluster.

    Dwelling in the current cluster costs the squared distance only; reached
    successors pay the transition log-probability; unreached ones pay the
    pseudo-count probability plus the new-transition penalty.
    """
    dist2 = np.asarray(dist2, dtype=float)
    pseudo = _pseudo_log(counts, z_index)
    costs = np.empty_like(dist2)
    for i in range(dist2.shape[0]):
        if i == z_index:
            costs[i] = dist2[i]
            continue
        a = counts.prob(z_index, i)
        if a > 0.0:
            costs[i] = dist2[i] - hp.lam2 * math.log(a)
        else:
            costs[i] = dist2[i] - hp.lam2 * pseudo + hp.lam3
    new_cost = hp.lam - hp.lam2 * pseudo + hp.lam3
    return costs, new_cost


def pick_assignment(costs: np.ndarray, new_cost: float) -> int:
    if costs.shape[0] == 0:
        return NEW
    best = int(np.argmin(costs))
    if new_cost < costs[best]:
        return NEW
    return best


def assign_hsmm(xi, clusters, counts: TransitionCounts, cursor: StreamCursor, hp: Hyperparams) -> int:
    if cursor.z is None or not clusters:
        return assign_dp(xi, clusters, hp.lam, hp.b_m)
    z_index = next(i for i, c in enumerate(clusters) if c.id == cursor.z)
    dist2 = np.array([subspace_distance(xi, c, hp.b_m) ** 2 for c in clusters])
    costs, new_cost = hsmm_costs(dist2, counts, z_index, hp)
    return pick_assignment(costs, new_cost)


def hsmm_loss(model, xi, z_prev: int | None, z: int) -> float:
    """Streaming single-point loss of the duration model for cluster id ``z``."""
    hp = model.hp
    index = model.index_of(z)
    dim, dist2 = model.spatial_terms(xi, index)
    loss = hp.lam * (model.K - 1) + hp.lam1 * dim + dist2
    loss += hp.lam3 * model.counts.distinct_out(index)
    if z_prev is not None and z_prev != z:
        prev_index = model.index_of(z_prev)
        a = model.counts.prob(prev_index, index)
        loss -= hp.lam2 * (math.log(a) if a > 0.0 else _pseudo_log(model.counts, prev_index))
    return float(loss)


@dataclass(frozen=True, eq=False)
class HsmmView:
    """Read-only snapshot of everything the forward recursion needs."""

    gaussians: tuple[Gaussian, ...]
    priors: np.ndarray
    transitions: np.ndarray
    dur_mu: np.ndarray
    dur_sigma: np.ndarray

    @property
    def K(self) -> int:
        return len(self.gaussians)


def _log_transitions(transitions: np.ndarray) -> np.ndarray:
    K = transitions.shape[0]
    log_a = np.full((K, K), -np.inf)
    for j in range(K):
        row = transitions[j]
        if row.sum() <= 0.0:
            # never left: the state renews itself
            log_a[j, j] = 0.0
            continue
        positive = row > 0.0
        log_a[j, positive] = np.log(row[positive])
    return log_a


# User value: predicts which segment is active at each future step, optionally conditioned on what was already seen.
def forward(
    view: HsmmView,
    horizon: int,
    s_max: int,
    observations: Sequence[Sequence[float]] | None = None,
    obs_idx: Sequence[int] | None = None,
) -> np.ndarray:
    """Row-normalized forward variable over ``horizon`` steps.

    ``observations`` is an optional observed prefix; ``obs_idx`` restricts its
    likelihood to a block of the model dimensions.
    """
    K = view.K
    T = int(horizon)
    if K < 1:
        raise NumericalError("forward needs at least one cluster")
    if T < 1 or s_max < 1:
        raise NumericalError("horizon and s_max must be positive")

    log_a = _log_transitions(np.asarray(view.transitions, dtype=float))
    steps = np.arange(1, s_max + 1, dtype=float)
    log_dur = norm.logpdf(steps[:, None], loc=view.dur_mu[None, :], scale=np.sqrt(view.dur_sigma)[None, :])

    log_obs = np.zeros((T, K))
    if observations is not None:
        for c, obs in enumerate(list(observations)[:T]):
            log_obs[c] = [log_density(g, obs, obs_idx) for g in view.gaussians]
    cum = np.vstack([np.zeros((1, K)), np.cumsum(log_obs, axis=0)])

    with np.errstate(divide="ignore"):
        log_alpha = np.full((T, K), -np.inf)
        log_alpha[0] = np.log(np.asarray(view.priors, dtype=float)) + log_obs[0]
    if not np.any(np.isfinite(log_alpha[0])):
        raise NumericalError("unreachable model at t=0")

    for t in range(1, T):
        S = min(s_max, t)
        prev = log_alpha[t - S:t][::-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            entered = logsumexp(prev[:, :, None] + log_a[None, :, :], axis=1)
        seg_obs = cum[t + 1][None, :] - cum[t + 1 - np.arange(1, S + 1)]
        terms = entered + log_dur[:S] + seg_obs
        if t <= s_max:
            initial = log_alpha[0] + log_dur[t - 1] + (cum[t + 1] - cum[1])
            terms = np.vstack([terms, initial[None, :]])
        with np.errstate(divide="ignore", invalid="ignore"):
            log_alpha[t] = logsumexp(terms, axis=0)
        if not np.any(np.isfinite(log_alpha[t])):
            raise NumericalError(f"unreachable model at t={t}")

    return np.exp(log_alpha - logsumexp(log_alpha, axis=1, keepdims=True))
