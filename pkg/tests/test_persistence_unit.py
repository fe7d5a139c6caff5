import json
import unittest

import numpy as np

from sosc import persistence
from sosc.bench.generator import generate, stationary_protocol
from sosc.contract import MODEL_SCHEMA_VERSION
from sosc.error_catalog import DataError, ModelFormatError
from sosc.gaussmath import Frame, Hyperparams, WeightMode
from sosc.model import SoscModel
from sosc.task_param import TpSoscModel


def _trained(T=250, seed=2):
    model = SoscModel(3, Hyperparams(lam=3.0, weight_mode=WeightMode.constant(40.0)))
    for xi in generate(stationary_protocol(D=3, T=T, seed=seed)).points:
        model.observe(xi)
    return model


class PersistenceUnitTests(unittest.TestCase):
    # User value: saved models come back bit-for-bit, hyperparameters included.
    def test_round_trip_is_exact(self):
        model = _trained()
        data = persistence.save(model)
        restored = persistence.load(data)
        self.assertEqual(persistence.save(restored), data)
        self.assertEqual(restored.hp, model.hp)
        self.assertEqual(restored.cursor, model.cursor)
        for a, b in zip(model.clusters, restored.clusters):
            np.testing.assert_array_equal(a.mean, b.mean)
            np.testing.assert_array_equal(a.observed, b.observed)

    def test_document_shape(self):
        doc = persistence.to_document(_trained(T=120))
        self.assertEqual(doc["version"], MODEL_SCHEMA_VERSION)
        self.assertEqual(doc["kind"], "plain")
        cluster = doc["clusters"][0]
        for key in ("id", "prior", "weight", "dur", "mean", "basis", "eig_diag", "dim", "avg_dist"):
            self.assertIn(key, cluster)
        self.assertEqual(len(doc["counts"]), len(doc["clusters"]))

    def test_task_parameterized_round_trip(self):
        model = TpSoscModel(2, 2)
        frames = [Frame.identity(2), Frame(np.array([[0.0, -1.0], [1.0, 0.0]]), np.array([1.0, 1.0]))]
        rng = np.random.default_rng(0)
        for xi in rng.normal(size=(60, 2)):
            model.tp_observe(xi, frames)
        data = persistence.save(model)
        restored = persistence.load(data)
        self.assertIsInstance(restored, TpSoscModel)
        self.assertEqual(restored.P, 2)
        self.assertEqual(persistence.save(restored), data)

    def test_unknown_version_is_rejected(self):
        doc = persistence.to_document(_trained(T=50))
        doc["version"] = 99
        with self.assertRaises(ModelFormatError):
            persistence.from_document(doc)

    def test_missing_fields_are_all_reported(self):
        doc = persistence.to_document(_trained(T=50))
        del doc["counts"]
        del doc["cursor"]
        with self.assertRaises(ModelFormatError) as ctx:
            persistence.from_document(doc)
        self.assertIn("counts", str(ctx.exception))
        self.assertIn("cursor", str(ctx.exception))

    def test_corrupt_cluster_is_rejected(self):
        doc = persistence.to_document(_trained(T=50))
        doc["clusters"][0]["mean"] = [0.0]
        with self.assertRaises(ModelFormatError):
            persistence.from_document(doc)

    def test_cursor_must_name_a_cluster(self):
        doc = persistence.to_document(_trained(T=50))
        doc["cursor"]["z"] = 1000
        with self.assertRaises(ModelFormatError):
            persistence.from_document(doc)

    def test_invalid_json_is_model_format_error(self):
        with self.assertRaises(ModelFormatError):
            persistence.load(b"{not json")
        # model format problems are data errors for exit-code purposes
        self.assertTrue(issubclass(ModelFormatError, DataError))

    # User value: a hand-edited or damaged model file fails loudly instead of skewing later fits.
    def test_non_finite_duration_is_rejected(self):
        doc = persistence.to_document(_trained(T=50))
        doc["clusters"][0]["dur"]["mu"] = float("inf")
        with self.assertRaises(ModelFormatError) as ctx:
            persistence.load(json.dumps(doc))
        self.assertIn("dur.mu must be finite", str(ctx.exception))

    def test_malformed_duration_is_rejected(self):
        doc = persistence.to_document(_trained(T=50))
        doc["clusters"][0]["dur"]["n"] = -1
        doc["clusters"][0]["dur"]["sigma"] = 0.0
        with self.assertRaises(ModelFormatError) as ctx:
            persistence.from_document(doc)
        self.assertIn("dur.n", str(ctx.exception))
        self.assertIn("dur.sigma", str(ctx.exception))

    def test_negative_transition_counts_are_rejected(self):
        doc = persistence.to_document(_trained())
        self.assertGreaterEqual(len(doc["clusters"]), 2)
        doc["counts"][0][1] = -5
        with self.assertRaises(ModelFormatError) as ctx:
            persistence.from_document(doc)
        self.assertIn("non-negative", str(ctx.exception))

    def test_self_transition_counts_are_rejected(self):
        doc = persistence.to_document(_trained())
        doc["counts"][0][0] = 3
        with self.assertRaises(ModelFormatError) as ctx:
            persistence.from_document(doc)
        self.assertIn("zero diagonal", str(ctx.exception))

    def test_non_integer_id_is_model_format_error(self):
        doc = persistence.to_document(_trained(T=50))
        doc["clusters"][0]["id"] = "first"
        with self.assertRaises(ModelFormatError) as ctx:
            persistence.from_document(doc)
        self.assertIn("id must be a non-negative integer", str(ctx.exception))

    def test_basis_wider_than_dimension_is_rejected(self):
        doc = persistence.to_document(_trained(T=50))
        cluster = doc["clusters"][0]
        width = cluster["dim"] + 2
        cluster["eig_diag"] = [1.0] * width
        cluster["basis"] = [[0.0] * width for _ in range(doc["D"])]
        with self.assertRaises(ModelFormatError) as ctx:
            persistence.from_document(doc)
        self.assertIn("more than dim + 1", str(ctx.exception))

    def test_non_finite_values_refuse_to_save(self):
        model = _trained(T=50)
        model.clusters[0].mean[0] = float("inf")
        with self.assertRaises(ModelFormatError):
            persistence.save(model)

    def test_saved_text_is_plain_json(self):
        doc = json.loads(persistence.save(_trained(T=50)).decode("utf-8"))
        self.assertIn("hyperparams", doc)
        self.assertEqual(doc["hyperparams"]["weight_mode"], {"kind": "constant", "w_star": 40.0})


if __name__ == "__main__":
    unittest.main()
