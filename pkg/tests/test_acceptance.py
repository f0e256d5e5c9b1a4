"""End-to-end checks of the coupled solvers on the desk-scale fixtures."""
import unittest

import numpy as np

from glocal.coupling.condensation import condense_matrix, expand_interior
from glocal.coupling.scenarios import chain_1d, cube_grid_3d, two_patch_2d
from glocal.engine import DelaySchedule, run_async_concurrent, run_async_simulated, run_sync_concurrent
from glocal.errors import DivergenceError
from glocal.models import TypeProblem, TypeRelaxation
from glocal.solvers import monolithic_reference, relative_error, richardson_sync
from glocal.spectral import admissible_omega, certify_paracontraction, generalized_alphas, spectral_bounds


class _Fixtures(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.fixtures = {
            "thermal": two_patch_2d(TypeProblem.Thermal),
            "elasticity": two_patch_2d(TypeProblem.Elasticity),
        }
        cls.references = {name: monolithic_reference(s) for name, s in cls.fixtures.items()}


class TestOracleEquivalence(_Fixtures):
    """Every variant reaches the directly solved coupled system"""

    def assertMatchesOracle(self, name, report):
        self.assertTrue(report.converged, f"{name}: {report}")
        self.assertLessEqual(relative_error(report.final_u_gamma, self.references[name].u_gamma), 1e-6)

    def test_synchronous(self):
        for name, scenario in self.fixtures.items():
            with self.subTest(name=name):
                self.assertMatchesOracle(name, richardson_sync(scenario, omega=1.0, tol=1e-10))
                self.assertMatchesOracle(
                    name, richardson_sync(scenario, tol=1e-10, relaxation=TypeRelaxation.Aitken))

    def test_simulated_delays(self):
        for name, scenario in self.fixtures.items():
            for d in (1, 2, 4):
                with self.subTest(name=name, D=d):
                    omega = spectral_bounds(scenario, d).default_omega
                    schedule = DelaySchedule.random_bounded(scenario.subdomain_ids, d, seed=d)
                    report, trace = run_async_simulated(scenario, omega, schedule, tol=1e-10)
                    self.assertMatchesOracle(name, report)
                    self.assertLessEqual(trace.max_sigma, d)

    def test_concurrent(self):
        for name, scenario in self.fixtures.items():
            with self.subTest(name=name):
                omega = spectral_bounds(scenario, 2).default_omega
                report, _ = run_async_concurrent(scenario, omega, tol=1e-10, max_delay=2)
                self.assertMatchesOracle(name, report)


class TestSynchronousRelaxationBoundary(_Fixtures):
    """Fixed relaxation converges below 2 / alpha_max and diverges above it"""

    def test_boundary(self):
        scenarios = dict(self.fixtures, chain=chain_1d(n_patches=2, refinement=2, contrast=0.5))
        for name, scenario in scenarios.items():
            with self.subTest(name=name):
                _, alpha_max = generalized_alphas(scenario)
                report = richardson_sync(scenario, omega=0.9 * 2.0 / alpha_max, tol=1e-8)
                self.assertTrue(report.converged)
                with self.assertRaises(DivergenceError):
                    richardson_sync(scenario, omega=1.1 * 2.0 / alpha_max, tol=1e-8)


class TestParacontractionCertificate(_Fixtures):
    """Sampled companion radii stay below one at the certified relaxation"""

    def test_certified_relaxation(self):
        for name, scenario in self.fixtures.items():
            for d in (1, 2, 4):
                with self.subTest(name=name, D=d):
                    omega = 0.9 * spectral_bounds(scenario, d).omega_async_factor
                    report = certify_paracontraction(scenario, omega, d, 100, seed=d, margin=1e-6)
                    self.assertTrue(report.passed, repr(report))

    def test_bound_is_conservative(self):
        scenario = self.fixtures["thermal"]
        for d in (1, 2):
            with self.subTest(D=d):
                factor = spectral_bounds(scenario, d).omega_async_factor
                self.assertGreaterEqual(admissible_omega(scenario, d, trials=10, seed=0, rel_tol=1e-2), factor)


class TestDegeneracyAndAitken(_Fixtures):

    def test_zero_delay_reproduces_sync(self):
        for name, scenario in self.fixtures.items():
            with self.subTest(name=name):
                sync = richardson_sync(scenario, omega=1.0, tol=1e-10)
                simulated, _ = run_async_simulated(scenario, 1.0, DelaySchedule.all_zero(scenario.subdomain_ids),
                                                   tol=1e-10)
                self.assertEqual(len(simulated.history), len(sync.history))
                for a, b in zip(simulated.history, sync.history):
                    self.assertLessEqual(np.linalg.norm(a.p_gamma - b.p_gamma),
                                         1e-14 * max(np.linalg.norm(b.p_gamma), 1.0))

    def test_aitken_dominance(self):
        for name, scenario in self.fixtures.items():
            with self.subTest(name=name):
                fixed = richardson_sync(scenario, omega=1.0, tol=1e-8)
                aitken = richardson_sync(scenario, tol=1e-8, relaxation=TypeRelaxation.Aitken)
                self.assertLessEqual(aitken.iterations, 0.8 * fixed.iterations)


class TestScheduleRobustness(_Fixtures):

    def test_limits_agree_across_schedules(self):
        scenario = self.fixtures["thermal"]
        reference = self.references["thermal"].u_gamma
        omega = spectral_bounds(scenario, 2).default_omega
        limits = []
        for seed in range(10):
            schedule = DelaySchedule.random_bounded(scenario.subdomain_ids, 2, seed=seed)
            report, _ = run_async_simulated(scenario, omega, schedule, tol=1e-12)
            self.assertTrue(report.converged)
            limits.append(report.final_u_gamma)
        for u in limits:
            self.assertLessEqual(relative_error(u, reference), 2e-8)
            self.assertLessEqual(relative_error(u, limits[0]), 2e-8)


class TestConcurrentAgreement(unittest.TestCase):

    def test_repeated_concurrent_runs(self):
        scenario = two_patch_2d(divisions=(8, 4), refinement=2)
        omega = spectral_bounds(scenario, 2).default_omega
        schedule = DelaySchedule.random_bounded(scenario.subdomain_ids, 2, seed=0)
        simulated, _ = run_async_simulated(scenario, omega, schedule, tol=1e-10)
        for run in range(10):
            with self.subTest(run=run):
                report, _ = run_async_concurrent(scenario, omega, tol=1e-10, max_delay=2)
                self.assertTrue(report.converged)
                self.assertLessEqual(report.relative_residual, 1e-10)
                self.assertLessEqual(relative_error(report.final_u_gamma, simulated.final_u_gamma), 1e-6)

    def test_fenced_run_matches_sequential(self):
        scenario = two_patch_2d(divisions=(8, 4), refinement=2)
        sequential = richardson_sync(scenario, omega=1.0, tol=1e-10)
        fenced = run_sync_concurrent(scenario, omega=1.0, tol=1e-10)
        np.testing.assert_array_equal(fenced.final_u_gamma, sequential.final_u_gamma)


class TestWeakScaling(unittest.TestCase):

    def test_cube_slice(self):
        counts = {}
        for n in (2, 3):
            scenario = cube_grid_3d(TypeProblem.Thermal, n=n)
            self.assertEqual(scenario.n_patches, n ** 3)
            aitken = richardson_sync(scenario, tol=1e-8, relaxation=TypeRelaxation.Aitken)
            self.assertTrue(aitken.converged)
            self.assertLessEqual(aitken.iterations, 40)
            counts[n] = aitken.iterations
            schedule = DelaySchedule.random_bounded(scenario.subdomain_ids, 2, seed=n)
            report, _ = run_async_simulated(scenario, spectral_bounds(scenario, 2).default_omega, schedule, tol=1e-8)
            self.assertTrue(report.converged)
        self.assertLessEqual(abs(counts[3] - counts[2]), max(0.5 * min(counts.values()), 2))


class TestTrivialExactness(unittest.TestCase):

    def test_exact_copies_converge_at_once(self):
        scenario = two_patch_2d(divisions=(8, 4), exact=True)
        floor = 1e-12 * np.linalg.norm(scenario.rhs_global)
        reports = [
            richardson_sync(scenario, omega=1.0),
            richardson_sync(scenario, relaxation=TypeRelaxation.Aitken),
            run_async_simulated(scenario, 0.5, DelaySchedule.random_bounded(scenario.subdomain_ids, 2))[0],
            run_async_concurrent(scenario, 0.5)[0],
            run_sync_concurrent(scenario),
        ]
        for report in reports:
            with self.subTest(variant=report.variant):
                self.assertTrue(report.converged)
                self.assertEqual(report.iterations, 0)
                self.assertLessEqual(report.r0_norm, floor)


class TestCondensationOracle(unittest.TestCase):

    def test_random_spd_systems(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            n = int(rng.integers(2, 51))
            m = rng.standard_normal((n, n))
            k = m @ m.T + n * np.eye(n)
            f = rng.standard_normal(n)
            iface = np.sort(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False))
            op = condense_matrix(k, f, iface)
            u = expand_interior(op, np.linalg.solve(op.schur, op.rhs))
            expected = np.linalg.solve(k, f)
            self.assertLessEqual(np.linalg.norm(u - expected), 1e-10 * np.linalg.norm(expected))


if __name__ == "__main__":
    unittest.main()
