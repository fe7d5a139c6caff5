# User value: This test keeps run summaries and JSON log lines readable by the tools that parse them.
import json
import logging
import unittest

import numpy as np

from sosc import metrics
from sosc.json_logging import JsonLogFormatter


class ObservabilityUnitTests(unittest.TestCase):
    def setUp(self):
        metrics.reset()

    def tearDown(self):
        metrics.reset()

    def test_counters_accumulate_with_tags(self):
        metrics.incr("clusters_created")
        metrics.incr("clusters_created", 2)
        metrics.incr("clusters_merged", view="0")
        counters = metrics.snapshot()["counters"]
        self.assertEqual(counters["clusters_created"], 3)
        self.assertEqual(counters["clusters_merged|view=0"], 1)

    def test_timers_keep_aggregates_only(self):
        for value in (2.0, 5.0, -1.0):
            metrics.observe_ms("observe_ms", value)
        timer = metrics.snapshot()["timers_ms"]["observe_ms"]
        self.assertEqual(timer["count"], 3.0)
        self.assertEqual(timer["sum_ms"], 7.0)
        self.assertEqual((timer["min_ms"], timer["max_ms"]), (0.0, 5.0))

    def test_snapshot_is_a_copy(self):
        metrics.incr("points_observed")
        snap = metrics.snapshot()
        snap["counters"]["points_observed"] = 99
        self.assertEqual(metrics.snapshot()["counters"]["points_observed"], 1)

    # User value: numpy values in log payloads come out as plain JSON numbers and lists.
    def test_formatter_emits_json_with_extra_fields(self):
        record = logging.LogRecord("sosc.model", logging.INFO, __file__, 1, "fit_completed K=%s", (4,), None)
        record.K = np.int64(4)
        record.mean = np.array([1.0, 2.0])
        record.skipped = None
        payload = json.loads(JsonLogFormatter(service="sosc").format(record))
        self.assertEqual(payload["service"], "sosc")
        self.assertEqual(payload["logger"], "sosc.model")
        self.assertEqual(payload["message"], "fit_completed K=4")
        self.assertEqual(payload["K"], 4)
        self.assertEqual(payload["mean"], [1.0, 2.0])
        self.assertNotIn("skipped", payload)

    # User value: the first step's infinite pre-update loss still yields a valid JSON line.
    def test_formatter_keeps_non_finite_values_valid(self):
        record = logging.LogRecord("sosc.model", logging.DEBUG, __file__, 1, "step", (), None)
        record.loss_before = float("inf")
        record.eig = np.array([1.0, np.nan])
        payload = json.loads(JsonLogFormatter(service="sosc").format(record))
        self.assertEqual(payload["loss_before"], "inf")
        self.assertEqual(payload["eig"], [1.0, "nan"])

    def test_timed_records_one_sample(self):
        with metrics.timed("observe_ms", kind="tp"):
            pass
        timer = metrics.snapshot()["timers_ms"]["observe_ms|kind=tp"]
        self.assertEqual(timer["count"], 1.0)
        self.assertGreaterEqual(timer["mean_ms"], 0.0)


if __name__ == "__main__":
    unittest.main()
