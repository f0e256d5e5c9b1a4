from glocal.runner.cfg import GeometryConfig, SolverConfig, OutputConfig, ScenarioConfig, load_config, parse_config
from glocal.runner.base_runner import ScenarioRunner, run_scenario, read_summaries, default_omega, build_schedule
from glocal.runner.suite import suite_cases, run_suite
