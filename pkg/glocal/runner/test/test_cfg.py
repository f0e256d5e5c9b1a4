import tempfile
import unittest
from pathlib import Path

from glocal.errors import ConfigValidationError
from glocal.models import TypeGeometry, TypeProblem, TypeRelaxation, TypeVariant
from glocal.runner.cfg import load_config, parse_config

MINIMAL = """
problem = "thermal"

[geometry]
name = "two-patch-2d"

[solver]
variant = "sync-aitken"
"""


class TestLoadConfig(unittest.TestCase):
    """Unit tests for scenario configuration files"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, text: str) -> Path:
        path = self.dir / "case.toml"
        path.write_text(text)
        return path

    def test_minimal_defaults(self):
        config = load_config(self.write(MINIMAL))
        self.assertEqual(config.problem, TypeProblem.Thermal)
        self.assertEqual(config.geometry.name, TypeGeometry.TwoPatch2D)
        self.assertEqual(config.solver.variant, TypeVariant.SyncAitken)
        self.assertEqual(config.solver.tol, 1e-8)
        self.assertEqual(config.solver.max_iter, 10000)
        self.assertIsNone(config.solver.omega)
        self.assertEqual(config.case, "two-patch-2d-thermal")
        self.assertEqual(config.scenario_params(), {})

    def test_generator_parameters(self):
        config = load_config(self.write(
            'problem = "elasticity"\ncontrast = 0.05\n[geometry]\nname = "cube-grid-3d"\nn = 2\nrefinement = 1\n'
        ))
        self.assertEqual(config.scenario_params(), {"n": 2, "refinement": 1, "contrast": 0.05})

    def test_tuple_parameters_are_hashable(self):
        config = load_config(self.write('[geometry]\nname = "two-patch-2d"\ndivisions = [8, 4]\n'))
        params = config.scenario_params()
        self.assertEqual(params["divisions"], (8, 4))
        hash(tuple(params.items()))

    def test_zero_omega_rejected(self):
        with self.assertRaises(ConfigValidationError) as ctx:
            load_config(self.write(MINIMAL + "omega = 0\n"))
        self.assertTrue(any("solver.omega" in m for m in ctx.exception.errors))

    def test_unknown_keys_are_named(self):
        with self.assertRaises(ConfigValidationError) as ctx:
            load_config(self.write(MINIMAL + "relax = 2\n[output]\nfolder = 'x'\n"))
        errors = "\n".join(ctx.exception.errors)
        self.assertIn("solver.relax", errors)
        self.assertIn("output.folder", errors)

    def test_errors_are_aggregated(self):
        with self.assertRaises(ConfigValidationError) as ctx:
            parse_config({"problem": "acoustics", "solver": {"tol": 2.0, "max_iter": -1}})
        self.assertEqual(len(ctx.exception.errors), 3)

    def test_parameter_foreign_to_generator(self):
        with self.assertRaises(ConfigValidationError) as ctx:
            parse_config({"geometry": {"name": "two-patch-2d", "n": 3}})
        self.assertIn("n not a parameter of two-patch-2d", str(ctx.exception))

    def test_unknown_generator(self):
        with self.assertRaises(ConfigValidationError):
            parse_config({"geometry": {"name": "torus"}})

    def test_table_schedule_needs_table(self):
        with self.assertRaises(ConfigValidationError):
            parse_config({"solver": {"variant": "async-sim", "schedule": "deterministic-table"}})

    def test_relaxation_key(self):
        config = parse_config({"solver": {"variant": "sync-concurrent", "relaxation": "aitken"}})
        self.assertEqual(config.solver.relaxation, TypeRelaxation.Aitken)
        self.assertEqual(parse_config({}).solver.relaxation, TypeRelaxation.Fixed)
        with self.assertRaises(ConfigValidationError) as ctx:
            parse_config({"solver": {"variant": "sync-fixed", "relaxation": "aitken"}})
        self.assertIn("sync-concurrent only", str(ctx.exception))

    def test_missing_file_and_bad_syntax(self):
        with self.assertRaises(ConfigValidationError):
            load_config(self.dir / "absent.toml")
        with self.assertRaises(ConfigValidationError):
            load_config(self.write("problem = \n"))


if __name__ == "__main__":
    unittest.main()
