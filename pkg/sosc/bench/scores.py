# User value: This file scores a learned segmentation against the truth with the standard clustering metrics.
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist
from sklearn.metrics import normalized_mutual_info_score, silhouette_score

from sosc.contract import MODEL_KIND_TP
from sosc.error_catalog import DataError


def silhouette(
    points: np.ndarray,
    labels: Sequence[int],
    sample_size: int | None = None,
    seed: int = 0,
) -> float:
    """Mean silhouette over Euclidean distances; singleton clusters score 0.

    ``sample_size`` scores a seeded random subset for long streams.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    labels = np.asarray(labels).reshape(-1)
    if labels.shape[0] != points.shape[0]:
        raise DataError(f"{labels.shape[0]} labels for {points.shape[0]} points")
    if sample_size is not None and sample_size < points.shape[0]:
        idx = np.sort(np.random.default_rng(seed).choice(points.shape[0], size=sample_size, replace=False))
        points, labels = points[idx], labels[idx]
    n_labels = np.unique(labels).size
    if n_labels < 2:
        raise DataError("silhouette needs at least two clusters")
    if n_labels >= points.shape[0]:
        raise DataError("silhouette needs fewer clusters than points")
    return float(silhouette_score(cdist(points, points), labels, metric="precomputed"))


def nmi(labels_a: Sequence[int], labels_b: Sequence[int]) -> float:
    a = np.asarray(labels_a).reshape(-1)
    b = np.asarray(labels_b).reshape(-1)
    if a.shape[0] != b.shape[0]:
        raise DataError(f"label length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] == 0:
        raise DataError("nmi needs at least one label")
    return float(normalized_mutual_info_score(a, b, average_method="arithmetic"))


def match_error(means: np.ndarray, centers: np.ndarray, penalty: float) -> float:
    """Hungarian-matched mean distance; each unmatched cluster on either side costs ``penalty``."""
    means = np.atleast_2d(np.asarray(means, dtype=float))
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if means.shape[0] == 0:
        raise DataError("no learned clusters to match")
    cost = cdist(means, centers)
    rows, cols = linear_sum_assignment(cost)
    unmatched = abs(means.shape[0] - centers.shape[0])
    return float((cost[rows, cols].sum() + penalty * unmatched) / max(means.shape[0], centers.shape[0]))


# User value: tells how close the learned cluster centres landed to the true ones.
def mean_match_error(model, truth_centers: np.ndarray, frames: Sequence | None = None) -> float:
    """Compares centres in world coordinates; a frame-based model maps its own through ``frames``."""
    if model.kind == MODEL_KIND_TP:
        means = np.array([g.mean for g in model.gaussians(frames)])
    else:
        means = np.array([c.mean for c in model.clusters])
    return match_error(means, truth_centers, model.hp.lam)
