import unittest

import numpy as np

from glocal.coupling.scenarios import chain_1d, two_patch_2d
from glocal.engine.concurrent import group_patches, run_async_concurrent, run_sync_concurrent
from glocal.errors import InvalidArgumentError
from glocal.models import TypeRelaxation
from glocal.solvers.reference import monolithic_reference, relative_error
from glocal.solvers.sync import richardson_sync


class TestGroupPatches(unittest.TestCase):

    def test_round_robin(self):
        self.assertListEqual(group_patches([1, 2, 3, 4, 5], 3), [[1, 3, 5], [2, 4]])
        self.assertListEqual(group_patches([1, 2], None), [[1], [2]])

    def test_rank_count_bounds(self):
        with self.assertRaises(InvalidArgumentError):
            group_patches([1, 2], 1)
        with self.assertRaises(InvalidArgumentError):
            group_patches([1, 2], 4)
        with self.assertRaises(InvalidArgumentError):
            group_patches([], None)


class TestConcurrentExecutor(unittest.TestCase):
    """Unit tests for the rank-thread executors"""

    @classmethod
    def setUpClass(cls):
        cls.scenario = two_patch_2d(divisions=(8, 4), refinement=2)
        cls.reference = monolithic_reference(cls.scenario)

    def test_exact_patches_on_two_ranks(self):
        scenario = chain_1d(exact=True)
        report, trace = run_async_concurrent(scenario, omega=1.0, rank_count=2, watchdog=10.0)
        self.assertTrue(report.converged)
        self.assertEqual(report.iterations, 0)
        self.assertEqual(len(trace.ranks), 2)

    def test_async_matches_reference(self):
        report, trace = run_async_concurrent(self.scenario, omega=0.5, tol=1e-10, max_iter=5000,
                                             max_delay=2, watchdog=20.0)
        self.assertTrue(report.converged)
        self.assertLessEqual(relative_error(report.final_u_gamma, self.reference.u_gamma), 1e-6)
        self.assertLessEqual(trace.max_sigma, 2)
        self.assertTrue(all(n >= 1 for n in report.per_patch_solves))

    def test_slow_rank_answers_less(self):
        report, _ = run_async_concurrent(self.scenario, omega=0.5, tol=1e-10, max_iter=5000,
                                         max_delay=3, rank_delays={2: 0.002}, watchdog=20.0)
        self.assertTrue(report.converged)
        fast, slow = report.per_patch_solves
        self.assertLess(slow, fast)

    def test_answer_once_mode(self):
        report, _ = run_async_concurrent(self.scenario, omega=0.5, tol=1e-10, max_iter=5000, max_delay=2,
                                         always_recompute=False, watchdog=20.0)
        self.assertTrue(report.converged)
        self.assertLessEqual(relative_error(report.final_u_gamma, self.reference.u_gamma), 1e-6)
        self.assertTrue(all(n <= report.total_global_solves for n in report.per_patch_solves))

    def test_artificial_slowdowns(self):
        """A slowed global model is outworked by its patches, and slowed patches by their global model"""
        slow_global, trace = run_async_concurrent(self.scenario, omega=0.05, tol=1e-14, max_iter=40,
                                                  max_delay=20, global_delay=0.003, watchdog=20.0)
        self.assertGreater(min(slow_global.per_patch_work), slow_global.total_global_solves)
        self.assertTrue(all(n <= slow_global.total_global_solves for n in slow_global.per_patch_solves))
        self.assertEqual(trace.final_solves[0], slow_global.total_global_solves)
        slow_patches, _ = run_async_concurrent(self.scenario, omega=0.05, tol=1e-14, max_iter=40,
                                               max_delay=20, rank_delays={1: 0.003, 2: 0.003}, watchdog=20.0)
        self.assertGreater(slow_patches.total_global_solves, max(slow_patches.per_patch_solves))

    def test_sync_reproduces_sequential_iterates(self):
        for relaxation in (TypeRelaxation.Fixed, TypeRelaxation.Aitken):
            with self.subTest(relaxation=relaxation):
                sequential = richardson_sync(self.scenario, omega=0.9, tol=1e-10, relaxation=relaxation)
                concurrent = run_sync_concurrent(self.scenario, omega=0.9, tol=1e-10, relaxation=relaxation,
                                                 watchdog=20.0)
                self.assertEqual(concurrent.iterations, sequential.iterations)
                np.testing.assert_array_equal(concurrent.residual_norms, sequential.residual_norms)
                np.testing.assert_array_equal(concurrent.omegas, sequential.omegas)
                np.testing.assert_array_equal(concurrent.final_u_gamma, sequential.final_u_gamma)
                self.assertEqual(concurrent.per_patch_solves, sequential.per_patch_solves)

    def test_sync_on_grouped_ranks(self):
        scenario = chain_1d(n_patches=3, refinement=2, contrast=0.5)
        sequential = richardson_sync(scenario, omega=0.5, tol=1e-10)
        concurrent = run_sync_concurrent(scenario, omega=0.5, tol=1e-10, rank_count=2, watchdog=20.0)
        np.testing.assert_array_equal(concurrent.residual_norms, sequential.residual_norms)

    def test_invalid_rank_count(self):
        with self.assertRaises(InvalidArgumentError):
            run_sync_concurrent(self.scenario, rank_count=7)
        with self.assertRaises(InvalidArgumentError):
            run_async_concurrent(self.scenario, omega=0.5, max_delay=-1)



class TestSolveCountsFollowMeshSizes(unittest.TestCase):
    """
    With the same two zones of interest, a coarse global mesh under refined
    patches makes the global rank step ahead of its patches, while a refined
    global mesh under coarse patches leaves the patch ranks repeating their
    answers between global solves.
    """

    @classmethod
    def setUpClass(cls):
        cls.small_global = two_patch_2d(divisions=(8, 4), refinement=20)
        cls.large_global = two_patch_2d(divisions=(64, 32), refinement=1)

    def run_contrast(self, scenario):
        report, trace = run_async_concurrent(scenario, omega=0.05, tol=1e-14, max_iter=40, max_delay=4,
                                             watchdog=30.0)
        self.assertFalse(report.converged)
        self.assertEqual(trace.final_solves[0], report.total_global_solves)
        return report

    def test_fixture_sizes(self):
        for sd in self.small_global.subdomains[1:]:
            self.assertGreater(sd.fine_system.size, 5 * self.small_global.subdomains[0].fine_system.size)
        for sd in self.large_global.subdomains[1:]:
            self.assertLess(5 * sd.fine_system.size, self.large_global.subdomains[0].fine_system.size)

    def test_small_global_outpaces_patches(self):
        report = self.run_contrast(self.small_global)
        self.assertGreater(report.total_global_solves, max(report.per_patch_solves))

    def test_large_global_is_outworked_by_patches(self):
        report = self.run_contrast(self.large_global)
        self.assertGreater(min(report.per_patch_work), report.total_global_solves)
        self.assertGreater(min(report.per_patch_recomputes), 0)

if __name__ == "__main__":
    unittest.main()
