import unittest

import numpy as np

from glocal.coupling.scenarios import chain_1d, two_patch_2d
from glocal.engine.schedule import DelaySchedule
from glocal.engine.simulated import run_async_simulated
from glocal.errors import InvalidArgumentError
from glocal.solvers.reference import monolithic_reference, relative_error
from glocal.solvers.sync import richardson_sync


class TestAsyncSimulated(unittest.TestCase):
    """Unit tests for the virtual-time asynchronous solver"""

    @classmethod
    def setUpClass(cls):
        cls.scenario = two_patch_2d(divisions=(8, 4), refinement=2)
        cls.reference = monolithic_reference(cls.scenario)

    def test_zero_delays_reproduce_sync(self):
        """With no delay the iterates are bitwise those of the synchronous solver"""
        sync = richardson_sync(self.scenario, omega=0.8, tol=1e-10)
        report, trace = run_async_simulated(self.scenario, omega=0.8, tol=1e-10)
        self.assertEqual(report.iterations, sync.iterations)
        np.testing.assert_array_equal(report.residual_norms, sync.residual_norms)
        np.testing.assert_array_equal(report.final_u_gamma, sync.final_u_gamma)
        self.assertEqual(trace.max_sigma, 0)
        self.assertEqual(report.per_patch_solves, sync.per_patch_solves)

    def test_random_delays_converge_to_reference(self):
        schedule = DelaySchedule.random_bounded(self.scenario.subdomain_ids, max_delay=2, seed=3)
        report, trace = run_async_simulated(self.scenario, omega=0.5, schedule=schedule, tol=1e-10, max_iter=3000)
        self.assertTrue(report.converged)
        self.assertLessEqual(relative_error(report.final_u_gamma, self.reference.u_gamma), 1e-6)
        self.assertLessEqual(trace.max_sigma, 2)
        self.assertEqual(len(trace), report.iterations + 1)
        # stale steps reuse cached answers
        self.assertLess(max(report.per_patch_solves), report.total_global_solves)

    def test_alternating_table_counts_one_fresh_patch_per_step(self):
        scenario = chain_1d(n_patches=2, refinement=2, contrast=0.5)
        schedule = DelaySchedule.from_table(scenario.subdomain_ids, [[0, 0, 1], [0, 1, 0]])
        report, trace = run_async_simulated(scenario, omega=0.5, schedule=schedule, tol=1e-10, max_iter=40)
        # both patches answer step 0, then exactly one new answer per step
        self.assertEqual(sum(report.per_patch_solves), report.iterations + 2)
        self.assertListEqual(trace.sigmas[0], [0, 0, 0])
        self.assertListEqual(trace.sigmas[1], [0, 1, 0])
        self.assertListEqual(trace.active[1], [0, 2])
        self.assertListEqual(trace.sigmas[2], [0, 0, 1])
        self.assertListEqual(trace.active[2], [0, 1])

    def test_trace_dataframe(self):
        schedule = DelaySchedule.random_bounded(self.scenario.subdomain_ids, max_delay=1, seed=0)
        report, trace = run_async_simulated(self.scenario, omega=0.5, schedule=schedule, tol=1e-6)
        df = trace.to_dataframe()
        self.assertListEqual(
            list(df.columns),
            ["j", "rank"] + [f"sigma_{s}" for s in self.scenario.subdomain_ids]
            + ["residual_norm", "omega", "solves_rank"],
        )
        self.assertEqual(len(df), len(trace) * len(trace.ranks))
        last = df[df["j"] == report.iterations]
        self.assertListEqual(last["solves_rank"].tolist(), [report.total_global_solves] + report.per_patch_solves)

    def test_schedule_must_match_scenario(self):
        schedule = DelaySchedule.all_zero([0, 1])
        with self.assertRaises(InvalidArgumentError):
            run_async_simulated(self.scenario, omega=0.5, schedule=schedule)


if __name__ == "__main__":
    unittest.main()
