# User value: This test pins the duration statistics, transition bookkeeping and forward recursion behind planning.
import math
import unittest

import numpy as np
from scipy.stats import norm

from sosc.contract import NEW
from sosc.duration_hsmm import (
    HsmmView,
    TransitionCounts,
    forward,
    hsmm_costs,
    merge_durations,
    pick_assignment,
    update_duration,
    update_transitions,
)
from sosc.error_catalog import DataError, NumericalError
from sosc.gaussmath import Gaussian, Hyperparams
from sosc.subspace import DurationStats


def _enumerate_paths(priors, transitions, dur_mu, dur_sigma, obs_lik, T, s_max):
    """Sums every segmentation path by brute force, grouped by where its last segment ends.

    A path opens with one step in some state, may stretch that opening segment
    by up to ``s_max`` steps, then chains (state, dwell) segments through the
    transition matrix. A row that never leaves renews its own state.
    """
    K = len(priors)
    A = [list(map(float, row)) for row in transitions]
    for i in range(K):
        if sum(A[i]) == 0.0:
            A[i][i] = 1.0

    def dwell(j, d):
        return math.exp(-((d - dur_mu[j]) ** 2) / (2.0 * dur_sigma[j])) / math.sqrt(2.0 * math.pi * dur_sigma[j])

    def emit(j, first, last):
        out = 1.0
        for u in range(first, last + 1):
            out *= obs_lik[u][j]
        return out

    totals = np.zeros((T, K))

    def walk(end, state, weight):
        totals[end, state] += weight
        for d in range(1, s_max + 1):
            stop = end + d
            if stop >= T:
                break
            for j in range(K):
                if A[state][j] > 0.0:
                    walk(stop, j, weight * A[state][j] * dwell(j, d) * emit(j, end + 1, stop))

    for i in range(K):
        opening = priors[i] * obs_lik[0][i]
        if opening == 0.0:
            continue
        walk(0, i, opening)
        for e in range(1, min(s_max, T - 1) + 1):
            walk(e, i, opening * dwell(i, e) * emit(i, 1, e))
    return totals / totals.sum(axis=1, keepdims=True)


def _view(means, priors, transitions, dur_mu, dur_sigma, var=0.5):
    return HsmmView(
        gaussians=tuple(Gaussian.isotropic(m, var) for m in means),
        priors=np.asarray(priors, dtype=float),
        transitions=np.asarray(transitions, dtype=float),
        dur_mu=np.asarray(dur_mu, dtype=float),
        dur_sigma=np.asarray(dur_sigma, dtype=float),
    )


class DurationHsmmUnitTests(unittest.TestCase):
    def test_update_duration_welford(self):
        stats = DurationStats()
        update_duration(stats, 70)
        self.assertEqual((stats.mu, stats.sigma, stats.n), (70.0, 1.0, 1))
        update_duration(stats, 90)
        self.assertEqual(stats.mu, 80.0)
        self.assertEqual(stats.e, 200.0)
        self.assertEqual(stats.sigma, 200.0)

    def test_constant_dwells_fall_back_to_floor(self):
        stats = DurationStats()
        for _ in range(4):
            update_duration(stats, 12)
        self.assertEqual(stats.sigma, 1.0)

    def test_merge_durations_pools_histories(self):
        a, b, both = DurationStats(), DurationStats(), DurationStats()
        for s in (70, 90):
            update_duration(a, s)
            update_duration(both, s)
        update_duration(b, 80)
        update_duration(both, 80)
        merged = merge_durations(a, b)
        self.assertAlmostEqual(merged.mu, both.mu)
        self.assertAlmostEqual(merged.e, both.e)
        self.assertAlmostEqual(merged.sigma, 100.0)
        self.assertEqual(merged.n, 3)

    def test_transition_counts_and_probabilities(self):
        counts = TransitionCounts()
        for _ in range(3):
            counts.add_state()
        update_transitions(counts, 0, 1)
        update_transitions(counts, 0, 1)
        row = update_transitions(counts, 0, 2)
        np.testing.assert_allclose(row, [0.0, 2.0 / 3.0, 1.0 / 3.0])
        self.assertEqual(counts.distinct_out(0), 2)
        np.testing.assert_allclose(counts.probabilities()[1], [0.0, 0.0, 0.0])

    def test_self_transition_is_rejected(self):
        counts = TransitionCounts(np.zeros((2, 2), dtype=np.int64))
        with self.assertRaises(DataError):
            update_transitions(counts, 1, 1)

    def test_merge_folds_rows_and_columns(self):
        counts = TransitionCounts(np.array([[0, 2, 1], [3, 0, 4], [5, 6, 0]]))
        counts.merge(0, 2)
        np.testing.assert_array_equal(counts.counts, [[0, 8], [7, 0]])

    # User value: dwelling, known switches and unexplored switches are priced differently.
    def test_hsmm_costs(self):
        hp = Hyperparams(lam=2.0, lam2=0.5, lam3=0.25)
        counts = TransitionCounts(np.array([[0, 3, 0], [1, 0, 0], [0, 0, 0]]))
        dist2 = np.array([1.0, 1.0, 1.0])
        costs, new_cost = hsmm_costs(dist2, counts, 0, hp)
        pseudo = -math.log(4.0)
        self.assertAlmostEqual(costs[0], 1.0)
        self.assertAlmostEqual(costs[1], 1.0)
        self.assertAlmostEqual(costs[2], 1.0 - 0.5 * pseudo + 0.25)
        self.assertAlmostEqual(new_cost, 2.0 - 0.5 * pseudo + 0.25)

    def test_pick_assignment_ties_keep_existing(self):
        self.assertEqual(pick_assignment(np.array([1.0, 0.5]), 0.5), 1)
        self.assertEqual(pick_assignment(np.array([1.0, 0.5]), 0.4), NEW)
        self.assertEqual(pick_assignment(np.zeros(0), 0.0), NEW)

    # User value: planning rests on a forward pass that equals the sum over every possible segmentation.
    def test_forward_matches_path_enumeration(self):
        means = [[0.0], [1.0], [2.5]]
        priors = [0.5, 0.3, 0.2]
        transitions = [[0.0, 0.7, 0.3], [0.4, 0.0, 0.6], [0.0, 0.0, 0.0]]
        dur_mu, dur_sigma = [3.0, 2.0, 4.0], [1.0, 2.5, 1.0]
        view = _view(means, priors, transitions, dur_mu, dur_sigma)
        observations = [[0.2], [0.1], [0.9]]
        T, s_max = 10, 4

        obs_lik = np.ones((T, 3))
        for c, x in enumerate(observations):
            for j, m in enumerate(means):
                obs_lik[c, j] = norm.pdf(x[0], loc=m[0], scale=math.sqrt(0.5))
        expected = _enumerate_paths(priors, transitions, dur_mu, dur_sigma, obs_lik, T, s_max)

        got = forward(view, T, s_max, observations)
        np.testing.assert_allclose(got, expected, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(got.sum(axis=1), 1.0, atol=1e-12)

    def test_forward_without_observations_matches_path_enumeration(self):
        transitions = [[0.0, 1.0], [1.0, 0.0]]
        view = _view([[0.0], [5.0]], [1.0, 0.0], transitions, [4.0, 6.0], [1.0, 1.0])
        expected = _enumerate_paths([1.0, 0.0], transitions, [4.0, 6.0], [1.0, 1.0], np.ones((16, 2)), 16, 8)
        np.testing.assert_allclose(forward(view, 16, 8), expected, rtol=1e-9, atol=1e-12)

    def test_forward_single_cluster_is_certain(self):
        view = _view([[0.0, 0.0]], [1.0], [[0.0]], [10.0], [1.0])
        np.testing.assert_allclose(forward(view, 30, 10), np.ones((30, 1)))

    def test_forward_prefix_selects_observed_cluster(self):
        view = _view([[0.0], [3.0], [6.0]], [1 / 3, 1 / 3, 1 / 3], np.ones((3, 3)) - np.eye(3), [5.0] * 3, [1.0] * 3)
        alpha = forward(view, 5, 10, observations=[[6.0]])
        self.assertEqual(int(np.argmax(alpha[0])), 2)

    def test_forward_observation_block(self):
        view = _view([[0.0, 9.0], [3.0, -9.0]], [0.5, 0.5], [[0.0, 1.0], [1.0, 0.0]], [5.0, 5.0], [1.0, 1.0])
        alpha = forward(view, 3, 10, observations=[[3.0]], obs_idx=[0])
        self.assertEqual(int(np.argmax(alpha[0])), 1)

    def test_forward_rejects_bad_arguments(self):
        view = _view([[0.0]], [1.0], [[0.0]], [1.0], [1.0])
        with self.assertRaises(NumericalError):
            forward(view, 0, 10)
        with self.assertRaises(NumericalError):
            forward(_view([], [], np.zeros((0, 0)), [], []), 5, 10)


if __name__ == "__main__":
    unittest.main()
