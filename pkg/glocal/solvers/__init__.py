from glocal.solvers.base import BaseSolver, IterationMonitor, global_solve
from glocal.solvers.relaxation import aitken_update, FixedRelaxation, AitkenRelaxation
from glocal.solvers.sync import compute_residual, richardson_sync, RichardsonSolver
from glocal.solvers.reference import ReferenceSolution, monolithic_reference, interface_load, relative_error
