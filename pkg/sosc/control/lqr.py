# User value: This file makes a simulated arm follow the learned targets smoothly instead of jumping between them.
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg as sla

from sosc.control.planning import StepwiseReference
from sosc.error_catalog import ControlError
from sosc.gaussmath import Gaussian, clamped_inverse, full_covariance, PRECISION_CLAMP

logger = logging.getLogger("sosc.control.lqr")

CARE_TOL = 1e-8
MAX_NEWTON_STEPS = 10_000
DEFAULT_R = 1e-2
DEFAULT_DT = 0.01


@dataclass(frozen=True)
class DoubleIntegrator:
    """Point mass in ``m`` dimensions with state ``[position; velocity]``."""

    m: int
    dt: float = DEFAULT_DT

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ControlError("double integrator needs at least one position dimension")
        if not self.dt > 0.0:
            raise ControlError("dt must be positive")

    @property
    def A(self) -> np.ndarray:
        m = self.m
        A = np.zeros((2 * m, 2 * m))
        A[:m, m:] = np.eye(m)
        return A

    @property
    def B(self) -> np.ndarray:
        m = self.m
        B = np.zeros((2 * m, m))
        B[m:, :] = np.eye(m)
        return B

    def discretize(self) -> tuple[np.ndarray, np.ndarray]:
        """Zero-order hold over ``dt``."""
        n, m = 2 * self.m, self.m
        block = np.zeros((n + m, n + m))
        block[:n, :n] = self.A
        block[:n, n:] = self.B
        exp = sla.expm(block * self.dt)
        return exp[:n, :n], exp[:n, n:]

    def step(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        Ad, Bd = self.discretize()
        return Ad @ x + Bd @ u


@dataclass(frozen=True, eq=False)
class LqrGains:
    kp: np.ndarray
    kv: np.ndarray
    P: np.ndarray
    residual: float

    @property
    def K(self) -> np.ndarray:
        return np.hstack([self.kp, self.kv])


@dataclass(frozen=True, eq=False)
class LqtResult:
    P: np.ndarray
    d: np.ndarray
    gains: np.ndarray
    feedforward: np.ndarray
    states: np.ndarray
    controls: np.ndarray


def default_R(m: int, scale: float = DEFAULT_R) -> np.ndarray:
    return scale * np.eye(m)


def state_weight(target: Gaussian | np.ndarray) -> np.ndarray:
    """``blockdiag(Σ̂⁻¹, 0)``: positions are tracked, velocities are free."""
    if isinstance(target, Gaussian):
        cov = full_covariance(target)
        floor = target.noise_floor * PRECISION_CLAMP
    else:
        cov = np.asarray(target, dtype=float)
        floor = max(float(np.min(np.linalg.eigvalsh(0.5 * (cov + cov.T)))), 1e-300) * PRECISION_CLAMP
    m = cov.shape[0]
    Q = np.zeros((2 * m, 2 * m))
    Q[:m, :m] = clamped_inverse(cov, floor)
    return Q


def _check_weights(Q: np.ndarray, R: np.ndarray, n: int, m: int) -> None:
    if Q.shape != (n, n) or R.shape != (m, m):
        raise ControlError(f"weights must be {n}x{n} and {m}x{m}")
    if np.min(np.linalg.eigvalsh(0.5 * (Q + Q.T))) < -1e-12 * max(1.0, float(np.max(np.abs(Q)))):
        raise ControlError("Q must be positive semi-definite")
    try:
        np.linalg.cholesky(0.5 * (R + R.T))
    except np.linalg.LinAlgError as exc:
        raise ControlError("R must be positive definite") from exc


def care_residual(A: np.ndarray, B: np.ndarray, Q: np.ndarray, R: np.ndarray, P: np.ndarray) -> float:
    res = A.T @ P + P @ A - P @ B @ np.linalg.solve(R, B.T @ P) + Q
    return float(np.linalg.norm(res, "fro"))


def _newton_kleinman(A, B, Q, R, P, tol):
    residual = care_residual(A, B, Q, R, P)
    for step in range(MAX_NEWTON_STEPS):
        if residual < tol:
            return P, residual
        K = np.linalg.solve(R, B.T @ P)
        Ak = A - B @ K
        P_next = sla.solve_continuous_lyapunov(Ak.T, -(Q + K.T @ R @ K))
        P_next = 0.5 * (P_next + P_next.T)
        if not np.all(np.isfinite(P_next)):
            break
        next_residual = care_residual(A, B, Q, R, P_next)
        if next_residual >= residual:
            # stalled at rounding level
            if residual >= tol:
                logger.warning("care_residual_stalled residual=%.3e tol=%.3e", residual, tol)
            return P, residual
        P, residual = P_next, next_residual
    raise ControlError(f"Riccati iteration did not converge (residual={residual:.3e})")


# User value: gives constant feedback gains that pull the arm onto a single target and hold it there.
def lqr_infinite(sys: DoubleIntegrator, Q: np.ndarray, R: np.ndarray | None = None) -> LqrGains:
    A, B = sys.A, sys.B
    Q = np.asarray(Q, dtype=float)
    R = default_R(sys.m) if R is None else np.asarray(R, dtype=float)
    _check_weights(Q, R, 2 * sys.m, sys.m)
    tol = CARE_TOL * max(1.0, float(np.linalg.norm(Q, "fro")))

    try:
        P = sla.solve_continuous_are(A, B, Q, R)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ControlError(f"Riccati equation has no stabilizing solution: {exc}") from exc
    P = 0.5 * (P + P.T)
    P, residual = _newton_kleinman(A, B, Q, R, P, tol)

    K = np.linalg.solve(R, B.T @ P)
    closed = np.linalg.eigvals(A - B @ K)
    if not np.all(closed.real < 0.0):
        raise ControlError("closed loop is not stable")
    m = sys.m
    logger.debug("lqr_solved m=%s residual=%.3e", m, residual)
    return LqrGains(kp=K[:, :m], kv=K[:, m:], P=P, residual=residual)


def lqr_control(gains: LqrGains, target: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``u = K^P(μ̂ˣ−x) + K^V(μ̂ẋ−ẋ)``; ``target`` is the full state target."""
    return gains.K @ (np.asarray(target, dtype=float) - np.asarray(x, dtype=float))


def _riccati_rhs(P, d, A, B, Rinv_Bt, Q, mu):
    # derivatives in reversed time
    PB = P @ B
    dP = A.T @ P + P @ A - PB @ Rinv_Bt @ P + Q
    dd = A.T @ d - PB @ (Rinv_Bt @ d) - P @ (A @ mu)
    return dP, dd


# User value: tracks a whole planned reference, easing through segment switches with look-ahead feedforward.
def lqt_finite(
    sys: DoubleIntegrator,
    ref: StepwiseReference,
    R: np.ndarray | None = None,
    x0: Sequence[float] | None = None,
) -> LqtResult:
    m = sys.m
    if ref.m != m:
        raise ControlError(f"reference has {ref.m} position dimensions, system has {m}")
    R = default_R(m) if R is None else np.asarray(R, dtype=float)
    A, B = sys.A, sys.B
    n, T, h = 2 * m, len(ref), sys.dt
    Q_steps = [state_weight(ref.covs[t]) for t in range(T)]
    _check_weights(Q_steps[0], R, n, m)
    Rinv_Bt = np.linalg.solve(R, B.T)
    targets = np.hstack([ref.means, np.zeros((T, m))])

    P = np.zeros((T, n, n))
    d = np.zeros((T, n))
    for k in range(T - 2, -1, -1):
        Q, mu = Q_steps[k], targets[k]
        P1, d1 = P[k + 1], d[k + 1]
        k1 = _riccati_rhs(P1, d1, A, B, Rinv_Bt, Q, mu)
        k2 = _riccati_rhs(P1 + 0.5 * h * k1[0], d1 + 0.5 * h * k1[1], A, B, Rinv_Bt, Q, mu)
        k3 = _riccati_rhs(P1 + 0.5 * h * k2[0], d1 + 0.5 * h * k2[1], A, B, Rinv_Bt, Q, mu)
        k4 = _riccati_rhs(P1 + h * k3[0], d1 + h * k3[1], A, B, Rinv_Bt, Q, mu)
        Pk = P1 + (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        dk = d1 + (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        if not (np.all(np.isfinite(Pk)) and np.all(np.isfinite(dk))):
            raise ControlError(f"non-finite Riccati state at t={k}")
        P[k] = 0.5 * (Pk + Pk.T)
        d[k] = dk

    gains = np.einsum("ij,tjk->tik", Rinv_Bt, P)
    feedforward = d @ Rinv_Bt.T

    Ad, Bd = sys.discretize()
    states = np.zeros((T + 1, n))
    if x0 is None:
        states[0] = targets[0]
    else:
        start = np.asarray(x0, dtype=float).reshape(-1)
        states[0, : start.shape[0]] = start
    controls = np.zeros((T, m))
    for t in range(T):
        controls[t] = gains[t] @ (targets[t] - states[t]) + feedforward[t]
        states[t + 1] = Ad @ states[t] + Bd @ controls[t]
    if not np.all(np.isfinite(states)):
        raise ControlError("rollout diverged")
    logger.debug("lqt_rolled_out T=%s m=%s", T, m)
    return LqtResult(P=P, d=d, gains=gains, feedforward=feedforward, states=states, controls=controls)
