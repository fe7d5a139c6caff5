# User value: This file produces seeded synthetic demonstration streams whose true segments are known, so fits can be scored.
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from sosc.error_catalog import DataError, NumericalError, UsageError

logger = logging.getLogger("sosc.bench.generator")

FLIP_DIMS = "flip_dims"
ADD_CLUSTERS = "add_clusters"
MUTATIONS = (FLIP_DIMS, ADD_CLUSTERS)
CENTER_BOX = 5.0
MAX_REJECTIONS = 10_000
MAX_RESTARTS = 100


@dataclass(frozen=True)
class StageChange:
    instant: int
    mutation: str
    n: int = 0

    def __post_init__(self) -> None:
        if self.mutation not in MUTATIONS:
            raise UsageError(f"unknown stage mutation {self.mutation!r}")
        if self.instant < 1:
            raise UsageError("stage instants must be positive")
        if self.mutation == ADD_CLUSTERS and self.n < 1:
            raise UsageError("add_clusters needs n >= 1")


@dataclass(frozen=True)
class GeneratorSpec:
    """Cyclic left-to-right stream of K noisy subspace clusters.

    ``centers`` and ``dims`` are drawn from ``seed`` when left empty.
    """

    D: int
    K: int
    T: int
    seed: int = 0
    dwell: tuple[int, int] = (70, 90)
    noise: float = 0.04
    centers: tuple[tuple[float, ...], ...] = ()
    dims: tuple[int, ...] = ()
    schedule: tuple[StageChange, ...] = ()

    def __post_init__(self) -> None:
        errors: list[str] = []
        if self.D < 2:
            errors.append("D must be at least 2")
        if self.K < 1:
            errors.append("K must be at least 1")
        if self.T < 1:
            errors.append("T must be at least 1")
        lo, hi = self.dwell
        if lo < 1 or lo > hi:
            errors.append("dwell must satisfy 1 <= s_lo <= s_hi")
        if self.noise < 0.0 or not math.isfinite(self.noise):
            errors.append("noise must be a finite non-negative variance")
        if self.centers and (len(self.centers) != self.K or any(len(c) != self.D for c in self.centers)):
            errors.append(f"centers must be {self.K} vectors of length {self.D}")
        if self.dims and (len(self.dims) != self.K or any(d < 0 or d > self.D - 1 for d in self.dims)):
            errors.append(f"dims must be {self.K} integers in [0, {self.D - 1}]")
        if errors:
            raise UsageError("invalid generator spec: " + "; ".join(errors))

    @property
    def separation(self) -> float:
        return 4.0 * math.sqrt(self.D)


@dataclass(frozen=True, eq=False)
class LabeledStream:
    points: np.ndarray
    labels: np.ndarray | None = None
    stages: np.ndarray | None = None
    frames: tuple | None = None
    truth: dict | None = field(default=None)

    def __post_init__(self) -> None:
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", points)
        T = points.shape[0]
        for name in ("labels", "stages"):
            value = getattr(self, name)
            if value is not None:
                arr = np.asarray(value, dtype=np.int64).reshape(-1)
                if arr.shape[0] != T:
                    raise DataError(f"{name} length {arr.shape[0]} does not match {T} points")
                object.__setattr__(self, name, arr)
        if self.frames is not None and len(self.frames) != T:
            raise DataError("frames must list one entry per point")

    def __len__(self) -> int:
        return int(self.points.shape[0])

    @property
    def D(self) -> int:
        return int(self.points.shape[1])


def random_basis(rng: np.random.Generator, D: int, d: int) -> np.ndarray:
    if d == 0:
        return np.zeros((D, 0))
    q, _ = np.linalg.qr(rng.standard_normal((D, d)))
    return q[:, :d]


def _place_centers(
    rng: np.random.Generator, fixed: list[np.ndarray], n_random: int, D: int, separation: float
) -> list[np.ndarray]:
    """Greedy rejection sampling; a stuck draw restarts the random centers."""
    for _ in range(MAX_RESTARTS):
        placed = list(fixed)
        for _ in range(n_random):
            candidates = rng.uniform(-CENTER_BOX, CENTER_BOX, size=(MAX_REJECTIONS, D))
            ok = np.ones(MAX_REJECTIONS, dtype=bool)
            for c in placed:
                ok &= np.linalg.norm(candidates - c, axis=1) >= separation
            hits = np.flatnonzero(ok)
            if hits.size == 0:
                break
            placed.append(candidates[hits[0]])
        else:
            return placed[len(fixed):]
    raise NumericalError(
        f"could not place {n_random} centers {separation:.3f} apart after {MAX_REJECTIONS} draws each"
    )


class _ClusterBank:
    def __init__(self, spec: GeneratorSpec, rng: np.random.Generator):
        self.spec = spec
        self.rng = rng
        self.centers: list[np.ndarray] = []
        self.dims: list[int] = []
        self.bases: list[np.ndarray] = []
        self.label_centers: dict[int, list[float]] = {}
        fixed = [np.asarray(c, dtype=float) for c in spec.centers]
        added = sum(change.n for change in spec.schedule if change.mutation == ADD_CLUSTERS)
        n_random = spec.K - len(fixed) + added
        self._pending = _place_centers(rng, fixed, n_random, spec.D, spec.separation) if n_random else []
        for k in range(spec.K):
            center = fixed[k] if fixed else self._pending.pop(0)
            self.add(center, spec.dims[k] if spec.dims else None)

    def add(self, center: np.ndarray | None = None, dim: int | None = None) -> None:
        D = self.spec.D
        if center is None:
            center = self._pending.pop(0)
        if dim is None:
            dim = int(self.rng.integers(1, D))
        self.label_centers[len(self.centers)] = center.tolist()
        self.centers.append(center)
        self.dims.append(int(dim))
        self.bases.append(random_basis(self.rng, D, int(dim)))

    def flip_dims(self) -> None:
        D = self.spec.D
        for k, d in enumerate(self.dims):
            self.dims[k] = D - d if 0 < d else d
            self.bases[k] = random_basis(self.rng, D, self.dims[k])

    def sample(self, k: int) -> np.ndarray:
        D = self.spec.D
        point = self.centers[k] + self.bases[k] @ self.rng.standard_normal(self.dims[k])
        if self.spec.noise > 0.0:
            point = point + math.sqrt(self.spec.noise) * self.rng.standard_normal(D)
        return point

    def truth(self) -> dict:
        return {
            "centers": [c.tolist() for c in self.centers],
            "dims": list(self.dims),
            "bases": [b.tolist() for b in self.bases],
            "label_centers": {str(k): v for k, v in self.label_centers.items()},
        }


# User value: reproduces the same labelled stream from the same seed, so experiments can be rerun exactly.
def generate(spec: GeneratorSpec) -> LabeledStream:
    rng = np.random.default_rng(spec.seed)
    bank = _ClusterBank(spec, rng)
    schedule = sorted(spec.schedule, key=lambda change: change.instant)
    lo, hi = spec.dwell

    points = np.zeros((spec.T, spec.D))
    labels = np.zeros(spec.T, dtype=np.int64)
    stages = np.zeros(spec.T, dtype=np.int64)
    stage, pending = 0, 0
    k, remaining = 0, int(rng.integers(lo, hi + 1))
    for t in range(spec.T):
        while pending < len(schedule) and schedule[pending].instant == t:
            change = schedule[pending]
            if change.mutation == FLIP_DIMS:
                bank.flip_dims()
            else:
                for _ in range(change.n):
                    bank.add()
            stage += 1
            pending += 1
            logger.debug("generator_stage t=%s stage=%s K=%s", t, stage, len(bank.centers))
        if remaining == 0:
            k = (k + 1) % len(bank.centers)
            remaining = int(rng.integers(lo, hi + 1))
        points[t] = bank.sample(k)
        labels[t] = k
        stages[t] = stage
        remaining -= 1

    logger.info(
        "stream_generated D=%s T=%s K=%s stages=%s seed=%s",
        spec.D,
        spec.T,
        len(bank.centers),
        stage + 1,
        spec.seed,
    )
    return LabeledStream(points=points, labels=labels, stages=stages, truth=bank.truth())


def stage_protocol(D: int = 3, seed: int = 0, stage_length: int = 2500) -> GeneratorSpec:
    """Three stages: 4 clusters, then dims flipped, then 2 clusters added."""
    return GeneratorSpec(
        D=D,
        K=4,
        T=3 * stage_length,
        seed=seed,
        schedule=(StageChange(stage_length, FLIP_DIMS), StageChange(2 * stage_length, ADD_CLUSTERS, 2)),
    )


def stationary_protocol(D: int, K: int = 4, T: int = 2500, seed: int = 0) -> GeneratorSpec:
    return GeneratorSpec(D=D, K=K, T=T, seed=seed)


def spec_from_dict(raw: dict) -> GeneratorSpec:
    """Build a spec from a config document; ``protocol`` selects a factory."""
    raw = dict(raw)
    protocol = raw.pop("protocol", None)
    seed = int(raw.pop("seed", 0))
    if protocol == "stage":
        return stage_protocol(int(raw.get("D", 3)), seed, int(raw.get("stage_length", 2500)))
    if protocol == "stationary":
        return stationary_protocol(int(raw["D"]), int(raw.get("K", 4)), int(raw.get("T", 2500)), seed)
    if protocol is not None:
        raise UsageError(f"unknown generator protocol {protocol!r}")
    try:
        return GeneratorSpec(
            D=int(raw["D"]),
            K=int(raw["K"]),
            T=int(raw["T"]),
            seed=seed,
            dwell=tuple(int(v) for v in raw.get("dwell", (70, 90))),
            noise=float(raw.get("noise", 0.04)),
            centers=tuple(tuple(float(v) for v in c) for c in raw.get("centers", ())),
            dims=tuple(int(d) for d in raw.get("dims", ())),
            schedule=tuple(
                StageChange(int(s["instant"]), str(s["mutation"]), int(s.get("n", 0))) for s in raw.get("schedule", ())
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid generator spec: {exc}") from exc


def with_seed(spec: GeneratorSpec, seed: int) -> GeneratorSpec:
    return replace(spec, seed=seed)


def run_lengths(labels: Sequence[int]) -> list[int]:
    labels = np.asarray(labels)
    if labels.size == 0:
        return []
    edges = np.flatnonzero(np.diff(labels)) + 1
    bounds = np.concatenate([[0], edges, [labels.size]])
    return np.diff(bounds).tolist()
