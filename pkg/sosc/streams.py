# User value: This file reads and writes the stream, frames, truth and CSV files every command exchanges.
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from sosc.bench.generator import LabeledStream
from sosc.error_catalog import DataError
from sosc.gaussmath import Frame


def _require_file(path: Path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    return path


def _parse_frames(raw: Any, where: str) -> tuple[Frame, ...]:
    if not isinstance(raw, list) or not raw:
        raise DataError(f"{where}: frames must be a non-empty list")
    try:
        return tuple(Frame.from_dict(f) for f in raw)
    except DataError as exc:
        raise DataError(f"{where}: {exc}") from exc


def _int_field(row: dict, key: str, where: str) -> int:
    value = row[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise DataError(f"{where}: '{key}' must be an integer")
    return value


# User value: loads a demonstration stream and points at the exact line when something is wrong.
def read_stream(path: Path, *, require_labels: bool = False) -> LabeledStream:
    path = _require_file(path)
    points: list[list[float]] = []
    labels: list[int] = []
    stages: list[int] = []
    frames: list[tuple[Frame, ...]] = []
    D = None
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            where = f"{path.name}:{lineno}"
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{where}: invalid JSON ({exc.msg})") from exc
            if not isinstance(row, dict) or not isinstance(row.get("x"), list):
                raise DataError(f"{where}: expected an object with an 'x' list")
            try:
                x = [float(v) for v in row["x"]]
            except (TypeError, ValueError) as exc:
                raise DataError(f"{where}: 'x' must hold numbers") from exc
            if not all(math.isfinite(v) for v in x):
                raise DataError(f"{where}: 'x' must be finite")
            if D is None:
                D = len(x)
            if len(x) != D or D == 0:
                raise DataError(f"{where}: expected {D} values, got {len(x)}")
            points.append(x)
            if "label" in row:
                labels.append(_int_field(row, "label", where))
            elif require_labels:
                raise DataError(f"{where}: missing 'label'")
            if "stage" in row:
                stages.append(_int_field(row, "stage", where))
            if "frames" in row:
                frames.append(_parse_frames(row["frames"], where))

    if not points:
        raise DataError(f"{path.name}: stream is empty")
    n = len(points)
    for name, values in (("label", labels), ("stage", stages), ("frames", frames)):
        if values and len(values) != n:
            raise DataError(f"{path.name}: '{name}' present on some lines only")
    return LabeledStream(
        points=np.array(points),
        labels=np.array(labels) if labels else None,
        stages=np.array(stages) if stages else None,
        frames=tuple(frames) if frames else None,
    )


def write_stream(path: Path, stream: LabeledStream) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for t in range(len(stream)):
            row: dict[str, Any] = {"t": t, "x": stream.points[t].tolist()}
            if stream.labels is not None:
                row["label"] = int(stream.labels[t])
            if stream.stages is not None:
                row["stage"] = int(stream.stages[t])
            if stream.frames is not None:
                row["frames"] = [f.to_dict() for f in stream.frames[t]]
            handle.write(json.dumps(row, separators=(",", ":")) + "\n")


def truth_path(stream_path: Path) -> Path:
    return Path(stream_path).with_suffix(".truth.json")


def write_truth(stream_path: Path, truth: dict) -> Path:
    target = truth_path(stream_path)
    write_json(target, truth)
    return target


def read_truth(stream_path: Path) -> dict | None:
    target = truth_path(stream_path)
    if not target.is_file():
        return None
    try:
        return json.loads(target.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{target.name}: invalid JSON ({exc.msg})") from exc


def read_frames(path: Path) -> tuple[Frame, ...]:
    path = _require_file(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path.name}: invalid JSON ({exc.msg})") from exc
    if not isinstance(doc, dict):
        raise DataError(f"{path.name}: expected an object with a 'frames' list")
    return _parse_frames(doc.get("frames"), path.name)


def write_json(path: Path, doc: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def _cell(value: Any) -> Any:
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


# User value: writes plot-ready tables with every float at full precision.
def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
            count += 1
    return count


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    path = _require_file(path)
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, [])
        return header, [row for row in reader]
