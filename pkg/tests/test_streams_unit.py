import json
import tempfile
import unittest
from pathlib import Path

import numpy as np

from sosc.bench.generator import LabeledStream, generate, stationary_protocol
from sosc.error_catalog import DataError
from sosc.gaussmath import Frame
from sosc.streams import (
    read_csv,
    read_frames,
    read_stream,
    read_truth,
    truth_path,
    write_csv,
    write_stream,
    write_truth,
)


class StreamsUnitTests(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.root = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def _write_lines(self, name, lines):
        path = self.root / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def test_stream_round_trip_keeps_values_exactly(self):
        stream = generate(stationary_protocol(D=3, T=120, seed=1))
        path = self.root / "s.jsonl"
        write_stream(path, stream)
        back = read_stream(path, require_labels=True)
        np.testing.assert_array_equal(back.points, stream.points)
        np.testing.assert_array_equal(back.labels, stream.labels)
        np.testing.assert_array_equal(back.stages, stream.stages)

    def test_frames_per_line_are_parsed(self):
        frames = (Frame.identity(2), Frame(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.array([1.0, 2.0])))
        stream = LabeledStream(points=np.zeros((2, 2)), frames=(frames, frames))
        path = self.root / "tp.jsonl"
        write_stream(path, stream)
        back = read_stream(path)
        self.assertEqual(len(back.frames), 2)
        np.testing.assert_array_equal(back.frames[1][1].offset, [1.0, 2.0])

    # User value: a bad line is reported by file name and line number.
    def test_malformed_line_names_location(self):
        path = self._write_lines("bad.jsonl", ['{"x": [1.0, 2.0]}', '{"x": [1.0, "a"]}'])
        with self.assertRaises(DataError) as ctx:
            read_stream(path)
        self.assertIn("bad.jsonl:2", str(ctx.exception))

    def test_dimension_change_is_rejected(self):
        path = self._write_lines("dim.jsonl", ['{"x": [1.0, 2.0]}', '{"x": [1.0]}'])
        with self.assertRaises(DataError) as ctx:
            read_stream(path)
        self.assertIn("dim.jsonl:2", str(ctx.exception))

    def test_non_finite_values_are_rejected(self):
        path = self._write_lines("nan.jsonl", ['{"x": [NaN, 2.0]}'])
        with self.assertRaises(DataError):
            read_stream(path)

    def test_empty_stream_is_rejected(self):
        path = self._write_lines("empty.jsonl", [""])
        with self.assertRaises(DataError):
            read_stream(path)

    def test_labels_required_for_scoring(self):
        path = self._write_lines("nolabel.jsonl", ['{"x": [1.0]}'])
        with self.assertRaises(DataError):
            read_stream(path, require_labels=True)

    def test_partial_labels_are_rejected(self):
        path = self._write_lines("partial.jsonl", ['{"x": [1.0], "label": 0}', '{"x": [2.0]}'])
        with self.assertRaises(DataError):
            read_stream(path)

    def test_missing_file_raises_file_not_found(self):
        with self.assertRaises(FileNotFoundError):
            read_stream(self.root / "absent.jsonl")

    def test_truth_sidecar(self):
        path = self.root / "run.jsonl"
        self.assertIsNone(read_truth(path))
        written = write_truth(path, {"centers": [[0.0, 1.0]]})
        self.assertEqual(written, truth_path(path))
        self.assertEqual(written.name, "run.truth.json")
        self.assertEqual(read_truth(path), {"centers": [[0.0, 1.0]]})

    def test_frames_file(self):
        path = self.root / "frames.json"
        path.write_text(json.dumps({"frames": [Frame.identity(2).to_dict()]}), encoding="utf-8")
        frames = read_frames(path)
        self.assertEqual(len(frames), 1)
        path.write_text(json.dumps({"frames": []}), encoding="utf-8")
        with self.assertRaises(DataError):
            read_frames(path)

    def test_csv_keeps_full_precision(self):
        path = self.root / "log.csv"
        value = 0.1 + 0.2
        self.assertEqual(write_csv(path, ["t", "v"], [[0, value], [1, np.float64(1.5)]]), 2)
        header, rows = read_csv(path)
        self.assertEqual(header, ["t", "v"])
        self.assertEqual(float(rows[0][1]), value)
        self.assertEqual(rows[1], ["1", "1.5"])


if __name__ == "__main__":
    unittest.main()
