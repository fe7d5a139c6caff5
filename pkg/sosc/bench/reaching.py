# User value: This file builds a small planar reaching task to check that shared and autonomous control actually reach the goal.
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from sosc.bench.generator import LabeledStream
from sosc.error_catalog import UsageError
from sosc.gaussmath import Frame

logger = logging.getLogger("sosc.bench.reaching")

POSITION = (0, 1)
LOOKAHEAD = (2, 3)


def min_jerk(start: np.ndarray, goal: np.ndarray, n: int) -> np.ndarray:
    tau = np.linspace(0.0, 1.0, n)[:, None]
    profile = 10.0 * tau**3 - 15.0 * tau**4 + 6.0 * tau**5
    return start + (goal - start) * profile


@dataclass(frozen=True, eq=False)
class ReachingScenario:
    """Point-mass demonstrations that approach ``goal`` and hold there.

    Stream points are ``[x_t; x_{t+lag}]``: the current position and where the
    demonstrator was ``lag`` steps later. Conditioning on the first block
    predicts the operator's intended position.
    """

    goal: np.ndarray
    rotation: np.ndarray
    demos: tuple[np.ndarray, ...]
    stream: LabeledStream
    lag: int
    n_move: int
    n_hold: int
    radius: float

    def frame(self) -> Frame:
        A = np.zeros((4, 4))
        A[:2, :2] = self.rotation
        A[2:, 2:] = self.rotation
        return Frame(A, np.concatenate([self.goal, self.goal]))

    def random_start(self, rng: np.random.Generator) -> np.ndarray:
        angle = rng.uniform(0.0, 2.0 * np.pi)
        return self.goal + self.radius * np.array([np.cos(angle), np.sin(angle)])

    # User value: gives a noisy human-like attempt at the same reach to test corrections against.
    def operator_trajectory(self, rng: np.random.Generator, noise: float = 0.05) -> np.ndarray:
        path = np.vstack(
            [min_jerk(self.random_start(rng), self.goal, self.n_move), np.tile(self.goal, (self.n_hold, 1))]
        )
        return path + noise * rng.standard_normal(path.shape)


def joint_points(path: np.ndarray, lag: int) -> np.ndarray:
    ahead = np.vstack([path[lag:], np.tile(path[-1], (min(lag, path.shape[0]), 1))])[: path.shape[0]]
    return np.hstack([path, ahead])


def reaching_task(
    n_demos: int = 6,
    seed: int = 0,
    n_move: int = 100,
    n_hold: int = 40,
    lag: int = 5,
    radius: float = 1.0,
    demo_noise: float = 0.0,
) -> ReachingScenario:
    if n_demos < 1 or n_move < 2 or n_hold < 1 or lag < 1:
        raise UsageError("reaching task needs n_demos >= 1, n_move >= 2, n_hold >= 1 and lag >= 1")
    rng = np.random.default_rng(seed)
    goal = rng.uniform(-1.0, 1.0, size=2)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    scenario_base = dict(goal=goal, rotation=rotation, lag=lag, n_move=n_move, n_hold=n_hold, radius=radius)

    demos, points, labels = [], [], []
    half = n_move // 2
    phase = np.concatenate([np.zeros(half), np.ones(n_move - half), np.full(n_hold, 2)]).astype(np.int64)
    for _ in range(n_demos):
        angle = rng.uniform(0.0, 2.0 * np.pi)
        start = goal + radius * np.array([np.cos(angle), np.sin(angle)])
        path = np.vstack([min_jerk(start, goal, n_move), np.tile(goal, (n_hold, 1))])
        if demo_noise > 0.0:
            path = path + demo_noise * rng.standard_normal(path.shape)
        demos.append(path)
        points.append(joint_points(path, lag))
        labels.append(phase)

    stream = LabeledStream(
        points=np.vstack(points),
        labels=np.concatenate(labels),
        truth={"centers": [np.concatenate([goal, goal]).tolist()], "goal": goal.tolist()},
    )
    logger.info("reaching_task_built demos=%s T=%s seed=%s", n_demos, len(stream), seed)
    return ReachingScenario(demos=tuple(demos), stream=stream, **scenario_base)
