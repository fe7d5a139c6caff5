# User value: This file saves trained models so a fit can be resumed or replayed exactly later.
from __future__ import annotations

import json
import math
from typing import Any, List

import numpy as np

from sosc.contract import MODEL_KIND_PLAIN, MODEL_KIND_TP, MODEL_SCHEMA_VERSION
from sosc.duration_hsmm import StreamCursor, TransitionCounts
from sosc.error_catalog import ConfigError, ModelFormatError
from sosc.gaussmath import Hyperparams
from sosc.model import SoscModel
from sosc.subspace import DurationStats, SubspaceCluster
from sosc.task_param import TpSoscModel

_SHARED_KEYS = ("id", "prior", "weight", "dur")
_SPATIAL_KEYS = ("mean", "basis", "eig_diag", "dim", "avg_dist")


def _spatial_doc(c: SubspaceCluster) -> dict:
    return {
        "mean": c.mean.tolist(),
        "basis": c.basis.tolist(),
        "eig_diag": c.eig_diag.tolist(),
        "dim": int(c.dim),
        "avg_dist": [float(v) if seen else None for v, seen in zip(c.avg_dist, c.observed)],
    }


def _cluster_doc(model: SoscModel, index: int) -> dict:
    head = model.views[0][index]
    doc = {
        "id": int(head.id),
        "prior": head.prior,
        "weight": head.weight,
        "dur": head.duration.to_dict(),
    }
    if model.kind == MODEL_KIND_TP:
        doc["frames"] = [_spatial_doc(view[index]) for view in model.views]
    else:
        doc.update(_spatial_doc(head))
    return doc


def to_document(model: SoscModel) -> dict:
    doc = {
        "version": MODEL_SCHEMA_VERSION,
        "kind": model.kind,
        "D": model.D,
        "hyperparams": model.hp.to_dict(),
        "next_id": model.next_id,
        "clusters": [_cluster_doc(model, i) for i in range(model.K)],
        "counts": model.counts.counts.tolist(),
        "cursor": model.cursor.to_dict(),
    }
    if model.kind == MODEL_KIND_TP:
        doc["P"] = model.P
    return doc


# User value: writes a model as plain JSON that round-trips every float exactly.
def save(model: SoscModel) -> bytes:
    try:
        text = json.dumps(to_document(model), allow_nan=False, separators=(",", ":"))
    except ValueError as exc:
        raise ModelFormatError(f"model holds a non-finite value: {exc}") from exc
    return text.encode("utf-8")


def _require(doc: dict, key: str, where: str, errors: List[str]) -> Any:
    if not isinstance(doc, dict) or key not in doc:
        errors.append(f"{where}.{key} is required")
        return None
    return doc[key]


def _finite_vector(raw: Any, length: int, where: str, errors: List[str]) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        errors.append(f"{where} must be a list of numbers")
        return np.zeros(length)
    if arr.shape[0] != length:
        errors.append(f"{where} must have length {length}")
        return np.zeros(length)
    if not np.all(np.isfinite(arr)):
        errors.append(f"{where} must be finite")
    return arr


def _finite_scalar(raw: Any, where: str, errors: List[str]) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        errors.append(f"{where} must be a number")
        return 0.0
    if not math.isfinite(value):
        errors.append(f"{where} must be finite")
    return value


def _parse_id(raw: Any, where: str, errors: List[str]) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int) or raw < 0:
        errors.append(f"{where}.id must be a non-negative integer")
        return -1
    return raw


def _parse_duration(raw: Any, where: str, errors: List[str]) -> DurationStats:
    if not isinstance(raw, dict) or any(key not in raw for key in ("mu", "sigma", "e", "n")):
        errors.append(f"{where}.dur must hold mu, sigma, e and n")
        return DurationStats()
    stats = DurationStats(
        mu=_finite_scalar(raw["mu"], f"{where}.dur.mu", errors),
        sigma=_finite_scalar(raw["sigma"], f"{where}.dur.sigma", errors),
        e=_finite_scalar(raw["e"], f"{where}.dur.e", errors),
        n=raw["n"] if isinstance(raw["n"], int) and not isinstance(raw["n"], bool) else -1,
    )
    if stats.n < 0:
        errors.append(f"{where}.dur.n must be a non-negative integer")
    if stats.sigma <= 0.0:
        errors.append(f"{where}.dur.sigma must be positive")
    if stats.e < 0.0:
        errors.append(f"{where}.dur.e must be non-negative")
    return stats


def _parse_counts(raw: Any, K: int, errors: List[str]) -> np.ndarray:
    if K == 0:
        return np.zeros((0, 0), dtype=np.int64)
    try:
        values = np.asarray(raw, dtype=float).reshape(K, K)
    except (TypeError, ValueError):
        errors.append(f"model.counts must be a {K}x{K} integer matrix")
        return np.zeros((K, K), dtype=np.int64)
    if not np.all(np.isfinite(values)) or not np.all(values == np.round(values)):
        errors.append("model.counts must hold integers")
    elif np.any(values < 0):
        errors.append("model.counts must be non-negative")
    elif np.any(np.diag(values) != 0):
        errors.append("model.counts must have a zero diagonal")
    return np.nan_to_num(values).astype(np.int64)


def _parse_spatial(raw: dict, D: int, where: str, errors: List[str]) -> dict:
    for key in _SPATIAL_KEYS:
        _require(raw, key, where, errors)
    if errors:
        return {}
    if not isinstance(raw["eig_diag"], list):
        errors.append(f"{where}.eig_diag must be a list")
        return {}
    eig = _finite_vector(raw["eig_diag"], len(raw["eig_diag"]), f"{where}.eig_diag", errors)
    r = eig.shape[0]
    try:
        basis = np.asarray(raw["basis"], dtype=float).reshape(D, r)
    except (TypeError, ValueError):
        errors.append(f"{where}.basis must be a {D}x{r} matrix")
        basis = np.zeros((D, r))
    if not np.all(np.isfinite(basis)):
        errors.append(f"{where}.basis must be finite")
    avg_raw = raw["avg_dist"]
    if not isinstance(avg_raw, list) or len(avg_raw) != D:
        errors.append(f"{where}.avg_dist must be a list of length {D}")
        avg_raw = [None] * D
    observed = np.array([v is not None for v in avg_raw], dtype=bool)
    avg = np.array([0.0 if v is None else _finite_scalar(v, f"{where}.avg_dist", errors) for v in avg_raw])
    dim = int(raw["dim"]) if isinstance(raw["dim"], int) else -1
    if dim < 0 or dim > max(0, D - 1) or dim > r:
        errors.append(f"{where}.dim is out of range")
    elif r > dim + 1:
        errors.append(f"{where}.basis holds {r} columns, more than dim + 1")
    return {
        "mean": _finite_vector(raw["mean"], D, f"{where}.mean", errors),
        "basis": basis,
        "eig_diag": eig,
        "dim": dim,
        "avg_dist": avg,
        "observed": observed,
    }


def from_document(doc: dict) -> SoscModel:
    errors: List[str] = []
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = doc.get("version")
    if version != MODEL_SCHEMA_VERSION:
        raise ModelFormatError(f"unsupported model version {version!r}, expected {MODEL_SCHEMA_VERSION}")

    kind = doc.get("kind", MODEL_KIND_PLAIN)
    if kind not in (MODEL_KIND_PLAIN, MODEL_KIND_TP):
        raise ModelFormatError(f"unknown model kind {kind!r}")
    D = _require(doc, "D", "model", errors)
    raw_clusters = _require(doc, "clusters", "model", errors)
    raw_counts = _require(doc, "counts", "model", errors)
    raw_cursor = _require(doc, "cursor", "model", errors)
    raw_hp = _require(doc, "hyperparams", "model", errors)
    if errors:
        raise ModelFormatError("; ".join(errors))
    if not isinstance(D, int) or D < 1:
        raise ModelFormatError("model.D must be a positive integer")
    if not isinstance(raw_clusters, list):
        raise ModelFormatError("model.clusters must be a list")
    P = doc.get("P", 1) if kind == MODEL_KIND_TP else 1
    if isinstance(P, bool) or not isinstance(P, int) or P < 1:
        raise ModelFormatError("model.P must be a positive integer")

    try:
        hp = Hyperparams.from_dict(raw_hp)
    except ConfigError as exc:
        raise ModelFormatError(str(exc)) from exc

    views: list[list[SubspaceCluster]] = [[] for _ in range(P)]
    for k, raw in enumerate(raw_clusters):
        where = f"clusters[{k}]"
        for key in _SHARED_KEYS:
            _require(raw, key, where, errors)
        if errors:
            break
        spatial_raw = raw.get("frames") if kind == MODEL_KIND_TP else [raw]
        if not isinstance(spatial_raw, list) or len(spatial_raw) != P:
            errors.append(f"{where}.frames must list {P} frame views")
            break
        cid = _parse_id(raw["id"], where, errors)
        duration = _parse_duration(raw["dur"], where, errors)
        if errors:
            break
        for j, view_raw in enumerate(spatial_raw):
            parsed = _parse_spatial(view_raw, D, f"{where}.frames[{j}]" if P > 1 else where, errors)
            if errors:
                break
            views[j].append(
                SubspaceCluster(
                    id=cid,
                    prior=_finite_scalar(raw["prior"], f"{where}.prior", errors),
                    weight=_finite_scalar(raw["weight"], f"{where}.weight", errors),
                    duration=duration.copy(),
                    **parsed,
                )
            )
        if errors:
            break

    K = len(raw_clusters)
    counts = _parse_counts(raw_counts, K, errors)
    try:
        cursor = StreamCursor.from_dict(raw_cursor)
    except (KeyError, TypeError, ValueError):
        errors.append("model.cursor is malformed")
        cursor = StreamCursor()
    ids = [c.id for c in views[0]]
    if len(set(ids)) != len(ids):
        errors.append("cluster ids must be unique")
    if cursor.z is not None and cursor.z not in ids:
        errors.append("cursor.z does not name a cluster")
    if errors:
        raise ModelFormatError("; ".join(errors))

    next_id = doc.get("next_id", max(ids, default=-1) + 1)
    if isinstance(next_id, bool) or not isinstance(next_id, int) or next_id <= max(ids, default=-1):
        raise ModelFormatError("model.next_id must be an integer above every cluster id")
    common = dict(views=views, counts=TransitionCounts(counts), cursor=cursor, next_id=next_id)
    if kind == MODEL_KIND_TP:
        return TpSoscModel(D, P, hp, **common)
    return SoscModel(D, hp, **common)


# User value: restores a saved model or fails with a clear schema error, never a half-built model.
def load(data: bytes | str) -> SoscModel:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    return from_document(doc)
