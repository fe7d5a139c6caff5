# User value: This file holds the Gaussian arithmetic every model, planner and controller builds on.
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg as sla
from scipy.stats import multivariate_normal

from sosc.contract import WEIGHT_CONSTANT, WEIGHT_ELIGIBILITY, WEIGHT_LINEAR, WEIGHT_MODES
from sosc.error_catalog import ConfigError, DataError, GaussianError

ORTHO_TOL = 1e-9
PRECISION_CLAMP = 1e-6


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


def sorted_eigh(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric eigendecomposition with eigenvalues in descending order.

    Equal eigenvalues keep the order numpy reports them in, which makes the
    result deterministic for a given input.
    """
    sym = 0.5 * (matrix + matrix.T)
    vals, vecs = np.linalg.eigh(sym)
    order = np.argsort(-vals, kind="stable")
    return vals[order], vecs[:, order]


def clamped_inverse(matrix: np.ndarray, floor: float) -> np.ndarray:
    vals, vecs = sorted_eigh(matrix)
    vals = np.maximum(vals, floor)
    return (vecs / vals) @ vecs.T


@dataclass(frozen=True, eq=False)
class Gaussian:
    """Mean plus factored covariance ``basis·diag(eigvals)·basisᵀ + noise_floor·I``.

    ``dim`` is the reported subspace dimension; it defaults to the number of
    basis columns but products of frame Gaussians report the smallest frame
    dimension while keeping the exact covariance.
    """

    mean: np.ndarray
    basis: np.ndarray
    eigvals: np.ndarray
    noise_floor: float
    dim: int | None = None

    def __post_init__(self) -> None:
        mean = _frozen_array(self.mean)
        D = mean.shape[0]
        basis = np.array(self.basis, dtype=float, copy=True)
        if basis.size == 0:
            basis = np.zeros((D, 0))
        eigvals = _frozen_array(np.reshape(self.eigvals, -1))
        basis.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "eigvals", eigvals)
        object.__setattr__(self, "noise_floor", float(self.noise_floor))

        if mean.ndim != 1:
            raise GaussianError("mean must be a vector")
        if basis.ndim != 2 or basis.shape[0] != D:
            raise GaussianError(f"basis must have {D} rows")
        r = basis.shape[1]
        if eigvals.shape[0] != r:
            raise GaussianError("eigvals length must match basis columns")
        if not self.noise_floor > 0.0:
            raise GaussianError("noise_floor must be positive")
        if r and not np.all(eigvals > 0.0):
            raise GaussianError("eigvals must be positive")
        if r and np.max(np.abs(basis.T @ basis - np.eye(r))) > ORTHO_TOL:
            raise GaussianError("basis is not orthonormal")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(basis)) and np.all(np.isfinite(eigvals))):
            raise GaussianError("Gaussian fields must be finite")
        if self.dim is None:
            object.__setattr__(self, "dim", r)

    @property
    def D(self) -> int:
        return int(self.mean.shape[0])

    @classmethod
    def isotropic(cls, mean: Sequence[float], noise_floor: float) -> "Gaussian":
        mean = np.asarray(mean, dtype=float)
        return cls(mean, np.zeros((mean.shape[0], 0)), np.zeros(0), noise_floor, 0)

    @classmethod
    def from_covariance(cls, mean: Sequence[float], cov: np.ndarray, dim: int | None = None) -> "Gaussian":
        """Refactor a dense SPD covariance, using its smallest eigenvalue as the floor."""
        mean = np.asarray(mean, dtype=float)
        vals, vecs = sorted_eigh(np.asarray(cov, dtype=float))
        if vals.size == 0:
            raise GaussianError("empty covariance")
        floor = float(vals[-1])
        if not floor > 0.0 or not np.all(np.isfinite(vals)):
            raise GaussianError("covariance is not positive definite")
        excess = vals - floor
        keep = excess > 1e-12 * max(1.0, float(vals[0]))
        return cls(mean, vecs[:, keep], excess[keep], floor, None if dim is None else int(dim))


def full_covariance(g: Gaussian) -> np.ndarray:
    cov = (g.basis * g.eigvals) @ g.basis.T + g.noise_floor * np.eye(g.D)
    return 0.5 * (cov + cov.T)


def precision(g: Gaussian) -> np.ndarray:
    return clamped_inverse(full_covariance(g), g.noise_floor * PRECISION_CLAMP)


def log_density(g: Gaussian, x: Sequence[float], idx: Sequence[int] | None = None) -> float:
    """Log of N(x | g) on the marginal block ``idx`` (all dimensions when None)."""
    cov = full_covariance(g)
    mean = g.mean
    if idx is not None:
        idx = list(idx)
        cov = cov[np.ix_(idx, idx)]
        mean = mean[idx]
    return float(multivariate_normal(mean=mean, cov=cov).logpdf(np.asarray(x, dtype=float)))


@dataclass(frozen=True, eq=False)
class Frame:
    rotation: np.ndarray
    offset: np.ndarray
    orthogonal: bool | None = None

    def __post_init__(self) -> None:
        A = np.array(self.rotation, dtype=float, copy=True)
        b = np.array(self.offset, dtype=float, copy=True).reshape(-1)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != b.shape[0]:
            raise GaussianError("frame rotation must be DxD and offset length D")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise GaussianError("frame fields must be finite")
        if np.linalg.matrix_rank(A) < A.shape[0]:
            raise GaussianError("frame rotation is singular")
        is_orth = bool(np.max(np.abs(A.T @ A - np.eye(A.shape[0]))) <= ORTHO_TOL)
        if self.orthogonal and not is_orth:
            raise GaussianError("frame declared orthogonal but AᵀA != I")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "rotation", A)
        object.__setattr__(self, "offset", b)
        object.__setattr__(self, "orthogonal", is_orth)

    @property
    def D(self) -> int:
        return int(self.offset.shape[0])

    @classmethod
    def identity(cls, D: int) -> "Frame":
        return cls(np.eye(D), np.zeros(D))

    def to_local(self, xi: Sequence[float]) -> np.ndarray:
        diff = np.asarray(xi, dtype=float) - self.offset
        if self.orthogonal:
            return self.rotation.T @ diff
        return np.linalg.solve(self.rotation, diff)

    def to_dict(self) -> dict:
        return {"A": self.rotation.tolist(), "b": self.offset.tolist()}

    @classmethod
    def from_dict(cls, raw: dict) -> "Frame":
        try:
            return cls(np.asarray(raw["A"], dtype=float), np.asarray(raw["b"], dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"invalid frame document: {exc}") from exc


def transform(g: Gaussian, f: Frame) -> Gaussian:
    if g.D != f.D:
        raise GaussianError(f"dimension mismatch: gaussian {g.D} vs frame {f.D}")
    A = f.rotation
    mean = A @ g.mean + f.offset
    if f.orthogonal:
        return Gaussian(mean, A @ g.basis, g.eigvals, g.noise_floor, g.dim)
    return Gaussian.from_covariance(mean, A @ full_covariance(g) @ A.T, dim=g.dim)


def product(gs: Iterable[Gaussian]) -> Gaussian:
    gs = list(gs)
    if not gs:
        raise GaussianError("product of an empty list")
    D = gs[0].D
    if any(g.D != D for g in gs):
        raise GaussianError("dimension mismatch in product")
    if len(gs) == 1:
        return gs[0]

    prec_sum = np.zeros((D, D))
    info = np.zeros(D)
    for g in gs:
        lam = precision(g)
        prec_sum += lam
        info += lam @ g.mean
    try:
        factor = sla.cho_factor(0.5 * (prec_sum + prec_sum.T))
    except np.linalg.LinAlgError as exc:
        raise GaussianError(f"precision sum is not positive definite: {exc}") from exc
    cov = sla.cho_solve(factor, np.eye(D))
    mean = sla.cho_solve(factor, info)
    return Gaussian.from_covariance(mean, 0.5 * (cov + cov.T), dim=min(g.dim for g in gs))


def condition(g: Gaussian, in_idx: Sequence[int], out_idx: Sequence[int], x_in: Sequence[float]) -> Gaussian:
    in_idx = [int(i) for i in in_idx]
    out_idx = [int(i) for i in out_idx]
    if not out_idx:
        raise GaussianError("out_idx must not be empty")
    if set(in_idx) & set(out_idx):
        raise GaussianError("in_idx and out_idx must be disjoint")
    if any(i < 0 or i >= g.D for i in in_idx + out_idx):
        raise GaussianError("index out of range")
    x_in = np.asarray(x_in, dtype=float).reshape(-1)
    if x_in.shape[0] != len(in_idx):
        raise GaussianError("x_in length must match in_idx")

    cov = full_covariance(g)
    s_oo = cov[np.ix_(out_idx, out_idx)]
    if not in_idx:
        return Gaussian.from_covariance(g.mean[out_idx], s_oo)

    s_ii = cov[np.ix_(in_idx, in_idx)]
    s_io = cov[np.ix_(in_idx, out_idx)]
    try:
        factor = sla.cho_factor(s_ii)
    except np.linalg.LinAlgError as exc:
        raise GaussianError(f"input covariance block is not invertible: {exc}") from exc
    gain = sla.cho_solve(factor, s_io).T
    mean = g.mean[out_idx] + gain @ (x_in - g.mean[in_idx])
    cond_cov = s_oo - gain @ s_io
    return Gaussian.from_covariance(mean, 0.5 * (cond_cov + cond_cov.T))


@dataclass(frozen=True)
class WeightMode:
    kind: str = WEIGHT_ELIGIBILITY
    zeta: float = 0.995
    w_star: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in WEIGHT_MODES:
            raise ConfigError(f"weight_mode must be one of {list(WEIGHT_MODES)}")
        if self.kind == WEIGHT_ELIGIBILITY and not 0.0 < self.zeta < 1.0:
            raise ConfigError("zeta must lie in (0, 1)")
        if self.kind == WEIGHT_CONSTANT and not self.w_star > 0.0:
            raise ConfigError("w_star must be positive")

    @classmethod
    def linear(cls) -> "WeightMode":
        return cls(WEIGHT_LINEAR)

    @classmethod
    def eligibility(cls, zeta: float = 0.995) -> "WeightMode":
        return cls(WEIGHT_ELIGIBILITY, zeta=zeta)

    @classmethod
    def constant(cls, w_star: float) -> "WeightMode":
        return cls(WEIGHT_CONSTANT, w_star=w_star)

    @property
    def w0(self) -> float:
        return self.w_star if self.kind == WEIGHT_CONSTANT else 1.0

    def to_dict(self) -> dict:
        if self.kind == WEIGHT_ELIGIBILITY:
            return {"kind": self.kind, "zeta": self.zeta}
        if self.kind == WEIGHT_CONSTANT:
            return {"kind": self.kind, "w_star": self.w_star}
        return {"kind": self.kind}

    @classmethod
    def from_dict(cls, raw: dict | str) -> "WeightMode":
        if isinstance(raw, str):
            return cls(raw)
        return cls(
            str(raw.get("kind", WEIGHT_ELIGIBILITY)),
            zeta=float(raw.get("zeta", 0.995)),
            w_star=float(raw.get("w_star", 1.0)),
        )


def _positive(name: str, value: float, errors: list[str]) -> None:
    if not (math.isfinite(value) and value > 0.0):
        errors.append(f"{name} must be positive")


def _nonneg(name: str, value: float, errors: list[str]) -> None:
    if not (math.isfinite(value) and value >= 0.0):
        errors.append(f"{name} must be nonnegative")


@dataclass(frozen=True)
class Hyperparams:
    """Penalties and noise settings; defaults are the synthetic-stream values."""

    lam: float = 3.6
    lam1: float = 0.35
    lam2: float = 0.025
    lam3: float = 0.025
    sigma2: float = 0.15
    b_m: float = 50.0
    weight_mode: WeightMode = field(default_factory=WeightMode)
    kappa2: float = 0.01
    s_max: int = 150

    def __post_init__(self) -> None:
        errors: list[str] = []
        _positive("lambda", self.lam, errors)
        _nonneg("lambda1", self.lam1, errors)
        _nonneg("lambda2", self.lam2, errors)
        _nonneg("lambda3", self.lam3, errors)
        _positive("sigma2", self.sigma2, errors)
        _positive("b_m", self.b_m, errors)
        _positive("kappa2", self.kappa2, errors)
        if int(self.s_max) != self.s_max or self.s_max < 1:
            errors.append("s_max must be a positive integer")
        if not isinstance(self.weight_mode, WeightMode):
            errors.append("weight_mode must be a WeightMode")
        if errors:
            raise ConfigError("invalid hyperparameters: " + "; ".join(errors))

    @classmethod
    def teleop(cls, **overrides) -> "Hyperparams":
        values = dict(
            lam=0.65,
            lam1=0.03,
            lam2=0.001,
            lam3=0.04,
            sigma2=2.5e-4,
            kappa2=0.01,
            weight_mode=WeightMode.linear(),
        )
        values.update(overrides)
        return cls(**values)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "lambda1": self.lam1,
            "lambda2": self.lam2,
            "lambda3": self.lam3,
            "sigma2": self.sigma2,
            "b_m": self.b_m,
            "weight_mode": self.weight_mode.to_dict(),
            "kappa2": self.kappa2,
            "s_max": int(self.s_max),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Hyperparams":
        defaults = cls()
        try:
            return cls(
                lam=float(raw.get("lambda", defaults.lam)),
                lam1=float(raw.get("lambda1", defaults.lam1)),
                lam2=float(raw.get("lambda2", defaults.lam2)),
                lam3=float(raw.get("lambda3", defaults.lam3)),
                sigma2=float(raw.get("sigma2", defaults.sigma2)),
                b_m=float(raw.get("b_m", defaults.b_m)),
                weight_mode=WeightMode.from_dict(raw.get("weight_mode", defaults.weight_mode.to_dict())),
                kappa2=float(raw.get("kappa2", defaults.kappa2)),
                s_max=int(raw.get("s_max", defaults.s_max)),
            )
        except (TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(f"invalid hyperparameters: {exc}") from exc
