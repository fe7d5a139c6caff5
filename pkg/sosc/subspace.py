# User value: This file lets each cluster learn the low-dimensional shape of its data one point at a time.
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from sosc.contract import NEW, WEIGHT_CONSTANT, WEIGHT_ELIGIBILITY
from sosc.gaussmath import Gaussian, WeightMode, sorted_eigh

DURATION_FLOOR = 1.0
RESIDUAL_TOL = 1e-9
DROP_RATIO = 1e-3
ORTHO_DRIFT = 1e-9


@dataclass
class DurationStats:
    """Welford running statistics of completed dwell lengths."""

    mu: float = 0.0
    sigma: float = DURATION_FLOOR
    e: float = 0.0
    n: int = 0

    def copy(self) -> "DurationStats":
        return DurationStats(self.mu, self.sigma, self.e, self.n)

    def to_dict(self) -> dict:
        return {"mu": self.mu, "sigma": self.sigma, "e": self.e, "n": int(self.n)}


@dataclass(eq=False)
class SubspaceCluster:
    id: int
    prior: float
    mean: np.ndarray
    basis: np.ndarray
    eig_diag: np.ndarray
    dim: int
    weight: float
    avg_dist: np.ndarray
    observed: np.ndarray
    duration: DurationStats = field(default_factory=DurationStats)

    @property
    def D(self) -> int:
        return int(self.mean.shape[0])

    @classmethod
    def new(cls, cid: int, xi: Sequence[float], weight: float) -> "SubspaceCluster":
        xi = np.array(xi, dtype=float, copy=True)
        D = xi.shape[0]
        return cls(
            id=cid,
            prior=0.0,
            mean=xi,
            basis=np.zeros((D, 0)),
            eig_diag=np.zeros(0),
            dim=0,
            weight=float(weight),
            avg_dist=np.zeros(D),
            observed=np.zeros(D, dtype=bool),
        )

    def copy(self) -> "SubspaceCluster":
        return SubspaceCluster(
            id=self.id,
            prior=self.prior,
            mean=self.mean.copy(),
            basis=self.basis.copy(),
            eig_diag=self.eig_diag.copy(),
            dim=self.dim,
            weight=self.weight,
            avg_dist=self.avg_dist.copy(),
            observed=self.observed.copy(),
            duration=self.duration.copy(),
        )

    def active_basis(self) -> np.ndarray:
        return self.basis[:, : self.dim]

    def trim(self) -> None:
        """Drops retained columns beyond ``dim + 1``; the next update never reads them."""
        self.basis = self.basis[:, : self.dim + 1]
        self.eig_diag = self.eig_diag[: self.dim + 1]

    # User value: exposes the learned cluster as an ordinary Gaussian for planning and regression.
    def gaussian(self, sigma2: float) -> Gaussian:
        return Gaussian(self.mean, self.active_basis(), self.eig_diag[: self.dim], sigma2, self.dim)

    def scatter(self) -> np.ndarray:
        """Factored running covariance over every retained basis column."""
        return (self.basis * self.eig_diag) @ self.basis.T


def projected_distance(xi: np.ndarray, mean: np.ndarray, basis: np.ndarray, b_m: float) -> float:
    diff = np.asarray(xi, dtype=float) - mean
    rho = math.exp(-float(diff @ diff) / b_m)
    if basis.shape[1] == 0:
        return float(np.linalg.norm(diff))
    return float(np.linalg.norm(diff - rho * (basis @ (basis.T @ diff))))


# User value: measures how far a point lies from the shape a cluster has learned.
def subspace_distance(xi: Sequence[float], c: SubspaceCluster, b_m: float) -> float:
    return projected_distance(np.asarray(xi, dtype=float), c.mean, c.active_basis(), b_m)


def gaussian_distance(xi: Sequence[float], g: Gaussian, b_m: float) -> float:
    return projected_distance(np.asarray(xi, dtype=float), g.mean, g.basis[:, : g.dim], b_m)


def assign_dp(xi: Sequence[float], clusters: Sequence[SubspaceCluster], lam: float, b_m: float) -> int:
    if not clusters:
        return NEW
    dist2 = np.array([subspace_distance(xi, c, b_m) ** 2 for c in clusters])
    best = int(np.argmin(dist2))
    if lam < dist2[best]:
        return NEW
    return best


def update_priors(clusters: Sequence[SubspaceCluster], winner: int, t: int) -> None:
    scale = 1.0 / (t + 1.0)
    for i, c in enumerate(clusters):
        c.prior = (t * c.prior + (1.0 if i == winner else 0.0)) * scale


# User value: moves the winning cluster toward the new point and keeps mixture priors normalized.
def update_prior_mean(clusters: Sequence[SubspaceCluster], winner: int, xi: Sequence[float], t: int) -> np.ndarray:
    """Returns the winner's mean before the update; the basis step needs it."""
    update_priors(clusters, winner, t)
    c = clusters[winner]
    mean_prev = c.mean.copy()
    c.mean = (c.weight * c.mean + np.asarray(xi, dtype=float)) / (c.weight + 1.0)
    return mean_prev


def next_weight(w: float, visited: bool, mode: WeightMode) -> float:
    if mode.kind == WEIGHT_CONSTANT:
        return mode.w_star
    if mode.kind == WEIGHT_ELIGIBILITY:
        return mode.zeta * w + (1.0 if visited else 0.0)
    return w + 1.0 if visited else w


def update_weight(c: SubspaceCluster, visited: bool, mode: WeightMode) -> float:
    c.weight = next_weight(c.weight, visited, mode)
    return c.weight


def _reorthonormalize(basis: np.ndarray) -> np.ndarray:
    r = basis.shape[1]
    if r == 0 or np.max(np.abs(basis.T @ basis - np.eye(r))) <= ORTHO_DRIFT:
        return basis
    q, upper = np.linalg.qr(basis)
    signs = np.sign(np.diag(upper))
    signs[signs == 0] = 1.0
    return q * signs


# User value: grows or rotates the cluster's principal directions without revisiting old data.
def update_basis(c: SubspaceCluster, xi: Sequence[float], mean_prev: np.ndarray, sigma2: float) -> tuple[np.ndarray, np.ndarray]:
    """Rank-one update of the active subspace; the result holds at most ``dim + 1`` columns."""
    xi = np.asarray(xi, dtype=float)
    w = c.weight
    U = c.active_basis()
    x_old = xi - mean_prev
    x_new = xi - c.mean

    residual = x_old - U @ (U.T @ x_old)
    norm_r = float(np.linalg.norm(residual))
    if norm_r <= RESIDUAL_TOL * float(np.linalg.norm(x_old)) or norm_r == 0.0:
        V = U
    else:
        V = np.column_stack([U, residual / norm_r])

    r = V.shape[1]
    if r == 0:
        c.basis, c.eig_diag = np.zeros((c.D, 0)), np.zeros(0)
        return c.basis, c.eig_diag

    # coefficients of the post-update offset in the augmented basis; x_new lies in span(V)
    coef = V.T @ x_new
    padded = np.zeros(r)
    padded[: U.shape[1]] = c.eig_diag[: U.shape[1]]
    reduced = (w / (w + 1.0)) * np.diag(padded) + (w / (w + 1.0) ** 2) * np.outer(coef, coef)

    vals, rot = sorted_eigh(reduced)
    keep = vals >= sigma2 * DROP_RATIO
    c.basis = _reorthonormalize(V @ rot[:, keep])
    c.eig_diag = vals[keep].copy()
    return c.basis, c.eig_diag


def select_dim(avg_dist: np.ndarray, observed: np.ndarray, lam1: float, max_dim: int | None = None) -> int:
    """Smallest-cost observed index of ``lam1·k + avg_dist[k]``; ties go to the smaller k."""
    upper = avg_dist.shape[0] - 1 if max_dim is None else min(max_dim, avg_dist.shape[0] - 1)
    best_k, best_cost = 0, math.inf
    for k in range(upper + 1):
        if not observed[k]:
            continue
        cost = lam1 * k + float(avg_dist[k])
        if cost < best_cost:
            best_k, best_cost = k, cost
    return best_k


# User value: picks how many directions a cluster needs, trading detail against the dimension penalty.
def update_dim(c: SubspaceCluster, xi: Sequence[float], lam1: float, b_m: float) -> tuple[np.ndarray, int]:
    xi = np.asarray(xi, dtype=float)
    w = c.weight
    upper = min(c.dim + 1, c.D - 1)
    for k in range(upper + 1):
        delta = projected_distance(xi, c.mean, c.basis[:, :k], b_m) ** 2
        if c.observed[k]:
            c.avg_dist[k] = (w * c.avg_dist[k] + delta) / (w + 1.0)
        else:
            # first sighting seeds the average; it has no history to blend with
            c.avg_dist[k] = delta
            c.observed[k] = True
    c.dim = select_dim(c.avg_dist, c.observed, lam1, max_dim=c.basis.shape[1])
    return c.avg_dist, c.dim


def mppca_loss(model, xi: Sequence[float], z: int) -> float:
    """Streaming single-point loss of the subspace mixture for cluster id ``z``."""
    hp = model.hp
    _, dist2 = model.spatial_terms(xi, model.index_of(z))
    return float(hp.lam * model.K + hp.lam1 * model.total_dim() + dist2)
