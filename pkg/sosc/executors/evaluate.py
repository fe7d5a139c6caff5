# User value: This file scores a fitted model against a labelled stream, or sweeps λ to find a good setting.
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Sequence

import numpy as np

from sosc.bench.generator import LabeledStream
from sosc.bench.scores import mean_match_error, nmi, silhouette
from sosc.config import RunConfig
from sosc.contract import MODEL_KIND_TP
from sosc.error_catalog import DataError
from sosc.executors.common import load_model, static_frames
from sosc.executors.fit import fit_stream, new_model
from sosc.gaussmath import Frame
from sosc.model import SoscModel
from sosc.streams import read_stream, read_truth, write_json

logger = logging.getLogger("sosc.executors.eval")


def truth_centers(stream: LabeledStream, truth: dict | None) -> np.ndarray:
    labels = np.unique(stream.labels)
    if truth and "label_centers" in truth:
        table = truth["label_centers"]
        missing = [int(l) for l in labels if str(int(l)) not in table]
        if missing:
            raise DataError(f"truth file has no center for labels {missing}")
        return np.array([table[str(int(l))] for l in labels], dtype=float)
    return np.array([stream.points[stream.labels == l].mean(axis=0) for l in labels])


def predict_labels(model: SoscModel, stream: LabeledStream, frames: Sequence[Frame] | None) -> np.ndarray:
    out = np.zeros(len(stream), dtype=np.int64)
    is_tp = model.kind == MODEL_KIND_TP
    for t in range(len(stream)):
        if is_tp:
            point_frames = stream.frames[t] if stream.frames is not None else frames
            out[t] = model.predict(stream.points[t], point_frames)
        else:
            out[t] = model.predict(stream.points[t])
    return out


def world_frames(stream: LabeledStream, frames: Sequence[Frame] | None) -> Sequence[Frame] | None:
    """Frames that place a frame-based model in the world: the given ones, else the stream's last."""
    if frames is not None:
        return frames
    if stream.frames is not None and len(stream.frames):
        return stream.frames[-1]
    return None


# User value: reports the numbers used to compare runs: silhouette, NMI, centre error, K and mean dimension.
def score_model(
    model: SoscModel,
    stream: LabeledStream,
    centers: np.ndarray,
    frames: Sequence[Frame] | None = None,
    silhouette_sample: int | None = None,
    seed: int = 0,
) -> dict:
    predicted = predict_labels(model, stream, frames)
    try:
        ss = silhouette(stream.points, predicted, sample_size=silhouette_sample, seed=seed)
    except DataError as exc:
        logger.warning("silhouette_undefined reason=%s", exc)
        ss = None
    priors = model.priors()
    dims = np.array([model.reported_dim(i) for i in range(model.K)], dtype=float)
    return {
        "SS": ss,
        "NMI": nmi(stream.labels, predicted),
        "mean_match_error": mean_match_error(model, centers, world_frames(stream, frames)),
        "K": model.K,
        "mean_dim": float(priors @ dims / priors.sum()) if priors.sum() > 0 else 0.0,
    }


def _sweep_point(lam: float, config: RunConfig, stream: LabeledStream, centers, frames) -> dict:
    started = time.perf_counter()
    hp = replace(config.hyperparams, lam=lam)
    model = fit_stream(new_model(config.kind, stream.D, hp, stream, frames), stream, frames)
    scores = score_model(model, stream, centers, frames, config.silhouette_sample, config.seed)
    return {"lambda": lam, **scores, "wall_time_s": time.perf_counter() - started}


def execute_eval(config: RunConfig) -> dict:
    logger.info("executor_start executor=eval input=%s sweep=%s", config.input, list(config.lambda_sweep))
    stream = read_stream(config.input, require_labels=True)
    centers = truth_centers(stream, read_truth(config.input))
    frames = static_frames(config)

    if config.lambda_sweep:
        # independent refits; each thread owns its model
        with ThreadPoolExecutor(max_workers=min(config.workers, len(config.lambda_sweep))) as pool:
            results = list(pool.map(lambda lam: _sweep_point(lam, config, stream, centers, frames), config.lambda_sweep))
        report: dict = {"sweep": results}
    else:
        started = time.perf_counter()
        model = load_model(config.model)
        report = score_model(model, stream, centers, frames, config.silhouette_sample, config.seed)
        report["wall_time_s"] = time.perf_counter() - started

    write_json(config.output, report)
    logger.info("eval_completed output=%s", config.output)
    return report
