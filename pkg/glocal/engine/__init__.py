from glocal.engine.schedule import DelaySchedule, partition_by_delay, cost_weighted_probabilities
from glocal.engine.window import WindowCell, WindowSnapshot
from glocal.engine.simulated import AsyncSimulatedSolver, run_async_simulated
from glocal.engine.concurrent import run_async_concurrent, run_sync_concurrent
