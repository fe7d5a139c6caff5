import unittest

import numpy as np

from sosc.bench.generator import (
    ADD_CLUSTERS,
    FLIP_DIMS,
    GeneratorSpec,
    StageChange,
    generate,
    run_lengths,
    spec_from_dict,
    stage_protocol,
    stationary_protocol,
    with_seed,
)
from sosc.bench.reaching import LOOKAHEAD, POSITION, joint_points, min_jerk, reaching_task
from sosc.bench.scores import match_error, nmi, silhouette
from sosc.error_catalog import DataError, NumericalError, UsageError


def _naive_silhouette(points, labels):
    """Per-point loops; singleton clusters score 0."""
    n = len(points)
    total = 0.0
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not own:
            continue
        a = np.mean([np.linalg.norm(points[i] - points[j]) for j in own])
        b = min(
            np.mean([np.linalg.norm(points[i] - points[j]) for j in range(n) if labels[j] == other])
            for other in set(labels)
            if other != labels[i]
        )
        total += (b - a) / max(a, b)
    return total / n


class GeneratorUnitTests(unittest.TestCase):
    # User value: the same seed always reproduces the same experiment.
    def test_same_seed_same_stream(self):
        spec = stationary_protocol(D=3, T=500, seed=7)
        a, b = generate(spec), generate(spec)
        np.testing.assert_array_equal(a.points, b.points)
        np.testing.assert_array_equal(a.labels, b.labels)
        c = generate(with_seed(spec, 8))
        self.assertFalse(np.array_equal(a.points, c.points))

    def test_dwell_lengths_stay_in_range(self):
        stream = generate(stationary_protocol(D=3, T=3000, seed=1))
        runs = run_lengths(stream.labels)
        self.assertTrue(all(70 <= r <= 90 for r in runs[:-1]))
        self.assertLessEqual(runs[-1], 90)

    def test_labels_cycle_left_to_right(self):
        stream = generate(stationary_protocol(D=3, K=4, T=1000, seed=2))
        order = [int(stream.labels[0])]
        for label in stream.labels[1:]:
            if label != order[-1]:
                order.append(int(label))
        self.assertEqual(order, [k % 4 for k in range(len(order))])

    def test_zero_noise_zero_dim_emits_centers(self):
        spec = GeneratorSpec(D=2, K=2, T=200, noise=0.0, dims=(0, 0), centers=((0.0, 0.0), (3.0, 4.0)))
        stream = generate(spec)
        for point, label in zip(stream.points, stream.labels):
            np.testing.assert_array_equal(point, spec.centers[label])

    def test_centers_are_separated(self):
        spec = stationary_protocol(D=3, K=4, T=10, seed=4)
        centers = np.array(generate(spec).truth["centers"])
        for i in range(len(centers)):
            for j in range(i + 1, len(centers)):
                self.assertGreaterEqual(np.linalg.norm(centers[i] - centers[j]), spec.separation)
        self.assertTrue(np.all(np.abs(centers) <= 5.0))

    def test_stage_protocol_flips_dims_and_adds_clusters(self):
        stream = generate(stage_protocol(D=3, seed=0, stage_length=300))
        self.assertEqual(sorted(set(stream.stages.tolist())), [0, 1, 2])
        self.assertEqual(int(stream.stages[299]), 0)
        self.assertEqual(int(stream.stages[300]), 1)
        self.assertEqual(len(stream.truth["centers"]), 6)
        self.assertTrue(set(stream.labels[:600].tolist()) <= {0, 1, 2, 3})

    def test_impossible_separation_fails(self):
        spec = GeneratorSpec(D=2, K=20, T=10)
        with self.assertRaises(NumericalError):
            generate(spec)

    def test_invalid_specs_are_usage_errors(self):
        with self.assertRaises(UsageError):
            GeneratorSpec(D=1, K=2, T=10)
        with self.assertRaises(UsageError):
            GeneratorSpec(D=3, K=2, T=10, dims=(0, 3))
        with self.assertRaises(UsageError):
            GeneratorSpec(D=3, K=2, T=10, dwell=(9, 5))
        with self.assertRaises(UsageError):
            StageChange(10, "explode")
        with self.assertRaises(UsageError):
            spec_from_dict({"protocol": "nope"})

    def test_spec_from_dict_explicit_fields(self):
        spec = spec_from_dict(
            {
                "D": 2,
                "K": 2,
                "T": 50,
                "seed": 3,
                "dwell": [5, 6],
                "schedule": [{"instant": 20, "mutation": ADD_CLUSTERS, "n": 1}, {"instant": 30, "mutation": FLIP_DIMS}],
            }
        )
        self.assertEqual((spec.D, spec.K, spec.T, spec.seed, spec.dwell), (2, 2, 50, 3, (5, 6)))
        self.assertEqual(len(spec.schedule), 2)
        self.assertEqual(spec_from_dict({"protocol": "stage", "stage_length": 100}).T, 300)


class ScoresUnitTests(unittest.TestCase):
    def test_silhouette_matches_naive_loops(self):
        rng = np.random.default_rng(0)
        points = rng.normal(size=(40, 3))
        labels = rng.integers(0, 3, size=40)
        labels[7] = 5  # singleton
        self.assertAlmostEqual(silhouette(points, labels), _naive_silhouette(points, labels), places=12)

    def test_silhouette_of_separated_blobs_is_high(self):
        rng = np.random.default_rng(1)
        points = np.vstack([rng.normal(size=(50, 2)) * 0.1, rng.normal(size=(50, 2)) * 0.1 + 10.0])
        labels = np.repeat([0, 1], 50)
        self.assertGreater(silhouette(points, labels), 0.95)
        self.assertGreater(silhouette(points, labels, sample_size=30, seed=2), 0.95)

    def test_silhouette_needs_two_clusters(self):
        with self.assertRaises(DataError):
            silhouette(np.zeros((5, 2)), np.zeros(5))
        with self.assertRaises(DataError):
            silhouette(np.zeros((3, 2)), [0, 1, 2])

    def test_nmi_bounds(self):
        labels = np.repeat([0, 1, 2, 3], 25)
        self.assertAlmostEqual(nmi(labels, labels), 1.0)
        self.assertAlmostEqual(nmi(labels, (labels + 1) % 4), 1.0)
        rng = np.random.default_rng(3)
        a, b = rng.integers(0, 4, 10_000), rng.integers(0, 4, 10_000)
        self.assertLess(nmi(a, b), 0.01)
        with self.assertRaises(DataError):
            nmi([0, 1], [0])

    def test_match_error_exact_and_penalized(self):
        centers = np.array([[0.0, 0.0], [5.0, 0.0]])
        self.assertEqual(match_error(centers[::-1], centers, penalty=3.6), 0.0)
        extra = np.vstack([centers, [[50.0, 50.0]]])
        self.assertAlmostEqual(match_error(extra, centers, penalty=3.6), 3.6 / 3)
        self.assertAlmostEqual(match_error(centers[:1] + [0.0, 1.0], centers, penalty=2.0), (1.0 + 2.0) / 2)


class ReachingUnitTests(unittest.TestCase):
    def test_min_jerk_endpoints_and_rest(self):
        path = min_jerk(np.array([0.0, 0.0]), np.array([1.0, 2.0]), 101)
        np.testing.assert_allclose(path[0], [0.0, 0.0])
        np.testing.assert_allclose(path[-1], [1.0, 2.0])
        np.testing.assert_allclose(path[1] - path[0], 0.0, atol=1e-4)

    def test_joint_points_pair_position_with_lookahead(self):
        path = np.arange(10, dtype=float)[:, None]
        joint = joint_points(path, 3)
        self.assertEqual(joint.shape, (10, 2))
        np.testing.assert_array_equal(joint[0], [0.0, 3.0])
        np.testing.assert_array_equal(joint[-1], [9.0, 9.0])

    def test_reaching_task_layout(self):
        task = reaching_task(n_demos=3, seed=1)
        self.assertEqual(task.stream.D, 4)
        self.assertEqual(len(task.stream), 3 * 140)
        hold = task.stream.points[task.stream.labels == 2]
        np.testing.assert_allclose(hold[:, list(POSITION)], np.tile(task.goal, (len(hold), 1)))
        np.testing.assert_allclose(hold[:, list(LOOKAHEAD)], np.tile(task.goal, (len(hold), 1)))
        starts = task.stream.points[::140, list(POSITION)]
        np.testing.assert_allclose(np.linalg.norm(starts - task.goal, axis=1), 1.0)

    def test_frame_maps_goal_origin(self):
        task = reaching_task(n_demos=1, seed=2)
        f = task.frame()
        np.testing.assert_allclose(f.to_local(np.concatenate([task.goal, task.goal])), np.zeros(4), atol=1e-12)
        self.assertTrue(f.orthogonal)

    def test_operator_trajectory_ends_near_goal(self):
        task = reaching_task(n_demos=2, seed=3)
        traj = task.operator_trajectory(np.random.default_rng(0), noise=0.0)
        self.assertEqual(traj.shape, (140, 2))
        np.testing.assert_allclose(traj[-1], task.goal)

    def test_invalid_task(self):
        with self.assertRaises(UsageError):
            reaching_task(n_demos=0)


if __name__ == "__main__":
    unittest.main()
