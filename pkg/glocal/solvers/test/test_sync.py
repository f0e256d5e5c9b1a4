import unittest
from concurrent.futures import ThreadPoolExecutor
from types import SimpleNamespace

import numpy as np
import scipy.sparse as sp

from glocal.coupling.scenarios import chain_1d, two_patch_2d
from glocal.errors import DivergenceError, InvalidArgumentError
from glocal.fem.assembly import assemble_poisson
from glocal.fem.mesh import Material, MeshModel
from glocal.models import TypeProblem, TypeRelaxation
from glocal.solvers.base import global_solve
from glocal.solvers.reference import interface_load, monolithic_reference, relative_error
from glocal.solvers.sync import compute_residual, field_contribution, richardson_sync, subdomain_contribution
from glocal.spectral.bounds import generalized_alphas


def scalar_surrogate(alpha: float, beta: float):
    """S^G = [1], b^G = 0 and a single subdomain with hat operator [alpha] and b_hat = [-beta]."""
    sd = SimpleNamespace(
        id=0,
        is_complement=True,
        assembly=sp.identity(1, format="csr"),
        reaction=lambda u: alpha * u - beta,
    )
    return SimpleNamespace(
        name="scalar",
        subdomains=[sd],
        interface_size=1,
        rhs_global=np.zeros(1),
        solve_global=lambda rhs: np.array(rhs, dtype=float),
    )


class TestGlobalSolve(unittest.TestCase):
    """Unit tests for the global interface solve"""

    def setUp(self):
        self.scenario = two_patch_2d(divisions=(8, 4), refinement=2)

    def test_zero_load(self):
        u0 = global_solve(self.scenario, np.zeros(self.scenario.interface_size))
        np.testing.assert_allclose(self.scenario.schur_global @ u0, self.scenario.rhs_global, atol=1e-10)

    def test_affinity(self):
        rng = np.random.default_rng(0)
        n = self.scenario.interface_size
        p1, p2 = rng.standard_normal(n), rng.standard_normal(n)
        lhs = global_solve(self.scenario, p1 + p2)
        rhs = global_solve(self.scenario, p1) + global_solve(self.scenario, p2) - global_solve(self.scenario, np.zeros(n))
        np.testing.assert_allclose(lhs, rhs, atol=1e-10 * np.abs(lhs).max())

    def test_shape_check(self):
        with self.assertRaises(InvalidArgumentError):
            global_solve(self.scenario, np.zeros(self.scenario.interface_size + 1))


class TestComputeResidual(unittest.TestCase):
    """Unit tests for the coupled interface residual"""

    @classmethod
    def setUpClass(cls):
        cls.scenario = two_patch_2d(divisions=(8, 4), refinement=2)
        cls.reference = monolithic_reference(cls.scenario)

    def test_exact_patches_balance(self):
        scenario = two_patch_2d(divisions=(8, 4), exact=True)
        u0 = global_solve(scenario, np.zeros(scenario.interface_size))
        self.assertLessEqual(np.linalg.norm(compute_residual(scenario, u0)), 1e-12 * np.linalg.norm(scenario.rhs_global))

    def test_initial_residual_is_minus_b_hat(self):
        u0 = global_solve(self.scenario, np.zeros(self.scenario.interface_size))
        r0 = compute_residual(self.scenario, u0)
        self.assertGreater(np.linalg.norm(r0), 0.0)
        np.testing.assert_allclose(r0, -self.scenario.hat_rhs, atol=1e-12 * np.linalg.norm(r0))

    def test_affine_in_the_trace(self):
        """r(u1) - r(u2) = -(sum of hats)(u1 - u2)"""
        rng = np.random.default_rng(5)
        n = self.scenario.interface_size
        u1, u2 = rng.standard_normal(n), rng.standard_normal(n)
        diff = compute_residual(self.scenario, u1) - compute_residual(self.scenario, u2)
        np.testing.assert_allclose(diff, -self.scenario.hat_sum @ (u1 - u2), atol=1e-10 * np.abs(diff).max())

    def test_zero_at_reference_trace(self):
        u0 = global_solve(self.scenario, np.zeros(self.scenario.interface_size))
        r0 = np.linalg.norm(compute_residual(self.scenario, u0))
        r = compute_residual(self.scenario, self.reference.u_gamma)
        self.assertLessEqual(np.linalg.norm(r), 1e-10 * r0)

    def test_converged_load_reproduces_reference(self):
        p_hat = interface_load(self.scenario, self.reference.u_gamma)
        u = global_solve(self.scenario, p_hat)
        np.testing.assert_allclose(u, self.reference.u_gamma, atol=1e-10 * np.abs(u).max())

    def test_full_local_solve_gives_the_same_answer(self):
        u = np.random.default_rng(3).standard_normal(self.scenario.interface_size)
        for sd in self.scenario.subdomains:
            with self.subTest(subdomain=sd.id):
                expected = subdomain_contribution(sd, u)
                np.testing.assert_allclose(field_contribution(sd, u), expected,
                                           atol=1e-10 * max(np.abs(expected).max(), 1.0))

    def test_executor_gives_identical_sum(self):
        u = np.random.default_rng(9).standard_normal(self.scenario.interface_size)
        with ThreadPoolExecutor(max_workers=3) as pool:
            parallel = compute_residual(self.scenario, u, executor=pool)
        np.testing.assert_array_equal(parallel, compute_residual(self.scenario, u))


class TestRichardson(unittest.TestCase):
    """Unit tests for synchronous stationary iterations"""

    def test_scalar_converges_below_bound(self):
        report = richardson_sync(scalar_surrogate(2.0, 1.0), omega=0.9, tol=1e-10, max_iter=500)
        self.assertTrue(report.converged)
        self.assertAlmostEqual(report.final_u_gamma[0], 0.5, places=8)

    def test_scalar_diverges_above_bound(self):
        with self.assertRaises(DivergenceError) as ctx:
            richardson_sync(scalar_surrogate(2.0, 1.0), omega=1.1, tol=1e-10, max_iter=10000)
        report = ctx.exception.report
        self.assertFalse(report.converged)
        self.assertGreater(report.final_residual_norm, 1e6 * report.r0_norm)

    def test_scalar_aitken_is_exact(self):
        report = richardson_sync(scalar_surrogate(2.0, 1.0), tol=1e-10, relaxation=TypeRelaxation.Aitken)
        self.assertTrue(report.converged)
        self.assertEqual(report.iterations, 2)
        np.testing.assert_allclose(report.omegas[:2], [1.0, 0.5])

    def test_max_iter_reached(self):
        report = richardson_sync(scalar_surrogate(2.0, 1.0), omega=0.01, tol=1e-10, max_iter=5)
        self.assertFalse(report.converged)
        self.assertEqual(report.iterations, 5)
        self.assertEqual(report.total_global_solves, 6)

    def test_invalid_parameters(self):
        with self.assertRaises(InvalidArgumentError):
            richardson_sync(scalar_surrogate(2.0, 1.0), omega=0.0)
        with self.assertRaises(InvalidArgumentError):
            richardson_sync(scalar_surrogate(2.0, 1.0), tol=0.0)

    def test_exact_patches_converge_immediately(self):
        report = richardson_sync(chain_1d(exact=True), omega=1.0)
        self.assertTrue(report.converged)
        self.assertEqual(report.iterations, 0)

    def test_two_patch_thermal(self):
        scenario = two_patch_2d()
        reference = monolithic_reference(scenario)
        report = richardson_sync(scenario, omega=1.0, tol=1e-8)
        self.assertTrue(report.converged)
        self.assertGreaterEqual(report.iterations, 5)
        self.assertLessEqual(report.iterations, 60)
        self.assertLessEqual(relative_error(report.final_u_gamma, reference.u_gamma), 1e-6)
        self.assertEqual(report.per_patch_solves, [report.total_global_solves] * 2)

        aitken = richardson_sync(scenario, tol=1e-8, relaxation=TypeRelaxation.Aitken)
        self.assertTrue(aitken.converged)
        self.assertLessEqual(aitken.iterations, report.iterations)

    def test_residuals_decrease_over_the_tail(self):
        """Below 2 / alpha_max the second half of the residual history is non-increasing"""
        for problem in (TypeProblem.Thermal, TypeProblem.Elasticity):
            with self.subTest(problem=problem):
                scenario = two_patch_2d(problem)
                _, alpha_max = generalized_alphas(scenario)
                self.assertLess(1.0, 2.0 / alpha_max)
                report = richardson_sync(scenario, omega=1.0, tol=1e-8)
                self.assertTrue(report.converged)
                norms = report.residual_norms
                tail = norms[len(norms) // 2:]
                for k in range(len(tail) - 1):
                    self.assertLessEqual(tail[k + 1], tail[k], f"step {len(norms) // 2 + k}")

    def test_history_dataframe(self):
        report = richardson_sync(scalar_surrogate(2.0, 1.0), omega=0.9, tol=1e-6)
        df = report.get_dataframe()
        self.assertListEqual(list(df.columns), ["j", "residual_norm", "omega", "wall_seconds"])
        self.assertEqual(len(df), report.iterations + 1)
        np.testing.assert_allclose(df["residual_norm"], report.residual_norms)


class TestMonolithicReference(unittest.TestCase):
    """Unit tests for the directly solved coupled system"""

    def test_exact_patches_match_global_solve(self):
        scenario = two_patch_2d(TypeProblem.Elasticity, divisions=(8, 4), exact=True)
        reference = monolithic_reference(scenario)
        u = scenario.global_system.solve()
        np.testing.assert_allclose(reference.u_gamma, u[scenario.gamma_dofs], atol=1e-10 * np.abs(u).max())
        full = scenario.global_system.expand(u)
        np.testing.assert_allclose(reference.fields[0], full[scenario.complement.parent_nodes],
                                   atol=1e-10 * np.abs(full).max())

    def test_refined_chain_against_merged_mesh(self):
        """A refined 1D patch glued to a coarse chain equals the solve of the merged mesh"""
        scenario = chain_1d(n_patches=1, cells=1, refinement=2)
        reference = monolithic_reference(scenario)
        # merged chain: 0, 1, 1.5, 2, 3 with Dirichlet at 0
        nodes = np.array([[0.0], [1.0], [1.5], [2.0], [3.0]])
        elements = np.array([[0, 1], [1, 2], [2, 3], [3, 4]])
        merged = MeshModel(dimension=1, nodes=nodes, elements=elements, material=Material.uniform(4)).with_dirichlet([0])
        u = assemble_poisson(merged, 1.0).solve()
        self.assertEqual(len(u), 4)
        # interface nodes x = 1 and x = 2 are free dofs 0 and 2
        np.testing.assert_allclose(reference.u_gamma, u[[0, 2]], atol=1e-12)


if __name__ == "__main__":
    unittest.main()
