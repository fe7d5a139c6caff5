# User value: This file predicts where the operator is heading and blends that prediction with their live input.
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from sosc.error_catalog import GaussianError, NumericalError
from sosc.gaussmath import Gaussian, condition, full_covariance, log_density, product


def responsibilities(
    gaussians: Sequence[Gaussian],
    priors: Sequence[float],
    in_idx: Sequence[int],
    x_in: Sequence[float],
) -> np.ndarray:
    if not gaussians:
        raise NumericalError("regression needs at least one component")
    with np.errstate(divide="ignore"):
        log_h = np.log(np.asarray(priors, dtype=float)) + np.array(
            [log_density(g, x_in, in_idx) for g in gaussians]
        )
    total = logsumexp(log_h)
    if not np.isfinite(total):
        raise NumericalError("input far from model: every responsibility underflows")
    return np.exp(log_h - total)


# User value: gives the model's best guess of the output block, with its uncertainty, for the current input.
def gmr(
    gaussians: Sequence[Gaussian],
    priors: Sequence[float],
    in_idx: Sequence[int],
    out_idx: Sequence[int],
    x_in: Sequence[float],
) -> Gaussian:
    h = responsibilities(gaussians, priors, in_idx, x_in)
    m = len(out_idx)
    mean = np.zeros(m)
    second = np.zeros((m, m))
    for weight, g in zip(h, gaussians):
        if weight == 0.0:
            continue
        cond = condition(g, in_idx, out_idx, x_in)
        mean += weight * cond.mean
        second += weight * (full_covariance(cond) + np.outer(cond.mean, cond.mean))
    cov = second - np.outer(mean, mean)
    return Gaussian.from_covariance(mean, 0.5 * (cov + cov.T))


def shared_control_step(
    gaussians: Sequence[Gaussian],
    priors: Sequence[float],
    in_idx: Sequence[int],
    out_idx: Sequence[int],
    xi_in: Sequence[float],
    kappa2: float,
) -> Gaussian:
    """Desired state: product of the operator's input N(xi_in, κ²I) and the GMR prediction."""
    if not kappa2 > 0.0:
        raise GaussianError("kappa2 must be positive")
    if len(in_idx) != len(out_idx):
        raise GaussianError("shared control needs input and output blocks of equal size")
    predicted = gmr(gaussians, priors, in_idx, out_idx, xi_in)
    operator = Gaussian.isotropic(np.asarray(xi_in, dtype=float), kappa2)
    return product([operator, predicted])
