"""
Thread-based executor reproducing the one-sided window protocols: passive
synchronization (asynchronous, put + flush into versioned windows) and
active synchronization (synchronous, fences between epochs).
"""
import logging
import threading
import time
from typing import Callable

import numpy as np

from glocal import settings
from glocal.coupling.topology import CouplingScenario
from glocal.engine.window import WindowCell
from glocal.errors import DivergenceError, InvalidArgumentError, LivelockError
from glocal.models import AsyncTrace, SolveReport, TypeRelaxation, TypeVariant
from glocal.solvers.base import IterationMonitor, global_solve, relaxed_update
from glocal.solvers.relaxation import FixedRelaxation, make_relaxation
from glocal.solvers.sync import assemble_residual, field_contribution, subdomain_contribution

__all__ = ["group_patches", "run_async_concurrent", "run_sync_concurrent"]

logger = logging.getLogger(__name__)


def group_patches(patch_ids: list[int], rank_count: int | None) -> list[list[int]]:
    """Round-robin assignment of patches to ranks 1..rank_count-1 (rank 0 is the global model)."""
    if not patch_ids:
        raise InvalidArgumentError("The concurrent executor needs at least one patch")
    rank_count = len(patch_ids) + 1 if rank_count is None else int(rank_count)
    if not 2 <= rank_count <= len(patch_ids) + 1:
        raise InvalidArgumentError(f"rank_count must lie in 2..{len(patch_ids) + 1}, got {rank_count}")
    groups: list[list[int]] = [[] for _ in range(rank_count - 1)]
    for i, s in enumerate(patch_ids):
        groups[i % len(groups)].append(s)
    return groups


class _Session:
    """Windows, counters and the stop signal shared by the rank threads of one run."""

    def __init__(self, scenario: CouplingScenario, rank_count: int | None, variant: str,
                 answer: Callable = subdomain_contribution):
        self.scenario = scenario
        self.variant = variant
        self.answer = answer
        self.by_id = {sd.id: sd for sd in scenario.subdomains}
        self.patch_ids = [sd.id for sd in scenario.subdomains if not sd.is_complement]
        self.complement = next((sd for sd in scenario.subdomains if sd.is_complement), None)
        self.groups = group_patches(self.patch_ids, rank_count)
        self.rank_count = len(self.groups) + 1
        n = scenario.interface_size
        self.u_cells = {rank: WindowCell(owner=rank, size=n, name=f"u@{rank}")
                        for rank in range(1, self.rank_count)}
        self.q_cells = {s: WindowCell(owner=0, size=n, name=f"q{s}@0") for s in self.patch_ids}
        self.control = WindowCell(owner=0, size=1, name="stop@0")
        self.stop = threading.Event()
        self.errors: list[BaseException] = []
        self.patch_solves = {s: 0 for s in self.patch_ids}
        self.patch_recomputes = {s: 0 for s in self.patch_ids}
        self.global_solves = 0
        self.outcome: dict = {}

    def rank_solves(self) -> list[int]:
        return [self.global_solves] + [sum(self.patch_solves[s] for s in g) for g in self.groups]

    def publish_trace(self, u: np.ndarray, j: int):
        for cell in self.u_cells.values():
            cell.put(u, tag=j)

    def stopped(self) -> bool:
        return self.stop.is_set() or self.control.version > 0

    def progress(self) -> int:
        cells = list(self.u_cells.values()) + list(self.q_cells.values())
        return sum(cell.version for cell in cells)

    def residual(self, u: np.ndarray, snapshots) -> np.ndarray:
        """Complement answers the current trace; patches contribute their latest window content."""
        contributions = []
        for sd in self.scenario.subdomains:
            if sd.is_complement:
                contributions.append(self.answer(sd, u))
            else:
                contributions.append(snapshots[sd.id].payload)
        return assemble_residual(self.scenario.interface_size, contributions)

    def guarded(self, target: Callable, *args) -> Callable[[], None]:
        def body():
            try:
                target(*args)
            except BaseException as e:
                self.errors.append(e)
                self.stop.set()
                if isinstance(getattr(self, "barrier", None), threading.Barrier):
                    self.barrier.abort()
        return body

    def launch(self, global_target: Callable, patch_target: Callable, watchdog: float):
        threads = [threading.Thread(target=self.guarded(global_target), name="rank-0", daemon=True)]
        for rank, group in enumerate(self.groups, start=1):
            threads.append(threading.Thread(target=self.guarded(patch_target, rank, group),
                                            name=f"rank-{rank}", daemon=True))
        for t in threads:
            t.start()

        last_progress, last_change = self.progress(), time.monotonic()
        while threads[0].is_alive():
            threads[0].join(timeout=min(0.05, watchdog))
            current = self.progress()
            if current != last_progress:
                last_progress, last_change = current, time.monotonic()
            elif time.monotonic() - last_change > watchdog:
                self.stop.set()
                if hasattr(self, "barrier"):
                    self.barrier.abort()
                self.errors.append(LivelockError(
                    f"[{self.variant}] no window advanced for {watchdog:.1f} s",
                    report=self.outcome.get("report"),
                ))
                break
        self.stop.set()
        for t in threads[1:]:
            t.join(timeout=watchdog)

        primary = [e for e in self.errors if not isinstance(e, threading.BrokenBarrierError)]
        if primary:
            raise primary[0]
        if self.errors:
            raise LivelockError(f"[{self.variant}] a fence was broken: {self.errors[0]!r}")


def run_async_concurrent(
        scenario: CouplingScenario,
        omega: float,
        tol: float | None = None,
        max_iter: int | None = None,
        rank_count: int | None = None,
        max_delay: int = 2,
        rank_delays: dict[int, float] | None = None,
        global_delay: float = 0.0,
        always_recompute: bool = True,
        watchdog: float | None = None,
) -> tuple[SolveReport, AsyncTrace]:
    """
    Asynchronous iterations on rank threads. Patch ranks loop on the latest
    trace in their window and put projected reactions into the global rank's
    windows; the global rank updates the load from whatever is there, waiting
    only when a patch's newest answer is older than `max_delay` steps.

    Every rank solves its complete model: patch ranks recover their fine
    interior before reading off the reaction, and the global rank does the
    same for the complement. A patch answer on a trace it already answered
    is a recomputation (`per_patch_recomputes`), not a solve.
    """
    if max_delay < 0:
        raise InvalidArgumentError(f"max_delay must be >= 0, got {max_delay}")
    relaxation = FixedRelaxation(omega)
    watchdog = settings.watchdog_seconds if watchdog is None else watchdog
    variant = str(TypeVariant.AsyncConcurrent)
    # ranks run complete local solves, so their cost follows their own mesh size
    session = _Session(scenario, rank_count, variant, answer=field_contribution)
    monitor = IterationMonitor(scenario, tol, max_iter, variant)
    rank_delays = rank_delays or {}
    trace = AsyncTrace(subdomain_ids=scenario.subdomain_ids, ranks=list(range(session.rank_count)))
    poll = settings.poll_seconds

    def patch_rank(rank: int, group: list[int]):
        cell = session.u_cells[rank]
        answered = {s: -1 for s in group}
        while not session.stopped():
            snap = cell.get()
            if snap.tag < 0:
                time.sleep(poll)
                continue
            for s in group:
                if session.stopped():
                    return
                repeat = answered[s] == snap.tag
                if repeat and not always_recompute:
                    continue
                contribution = session.answer(session.by_id[s], snap.payload)
                if rank_delays.get(rank):
                    time.sleep(rank_delays[rank])
                session.q_cells[s].put(contribution, tag=snap.tag)
                if repeat:
                    session.patch_recomputes[s] += 1
                else:
                    session.patch_solves[s] += 1
                answered[s] = snap.tag
            # always-recompute ranks keep the processor until the interpreter switches threads
            if not always_recompute:
                time.sleep(poll)

    def global_rank():
        p = np.zeros(scenario.interface_size)
        u = global_solve(scenario, p)
        session.global_solves += 1
        session.publish_trace(u, 0)
        j = 0
        seen: dict[int, int] = {}
        while True:
            oldest = max(0, j - max_delay)
            snaps = {s: cell.get() for s, cell in session.q_cells.items()}
            stale = any(snap.tag < oldest for snap in snaps.values())
            # without always-recompute a step needs at least one new answer
            unchanged = not always_recompute and j > 0 and all(snaps[s].version == seen.get(s) for s in snaps)
            if stale or unchanged:
                if session.stop.is_set():
                    return
                time.sleep(poll)
                continue
            seen = {s: snap.version for s, snap in snaps.items()}
            residual = session.residual(u, snaps)
            norm = float(np.linalg.norm(residual))
            converged = monitor.converged(norm)
            omega_j = relaxation.next(residual)
            monitor.record(j, p, residual, norm, omega_j)
            sigma = [0 if sd.is_complement else j - snaps[sd.id].tag for sd in scenario.subdomains]
            fresh = [sd.id for sd, k in zip(scenario.subdomains, sigma) if k == 0]
            trace.append(j, sigma, fresh, norm, omega_j, session.rank_solves())
            session.outcome["report"] = _report(converged, u, p)
            if not converged and monitor.diverged(norm):
                session.control.put(np.ones(1))
                raise DivergenceError(
                    f"[{variant}] residual {norm:.3e} exceeds {monitor.divergence_factor:g} x |r0| at step {j}",
                    report=session.outcome["report"],
                )
            if converged or j >= monitor.max_iter:
                session.control.put(np.ones(1))
                return
            p = relaxed_update(p, omega_j, residual)
            j += 1
            if global_delay:
                time.sleep(global_delay)
            u = global_solve(scenario, p)
            session.global_solves += 1
            session.publish_trace(u, j)

    def _report(converged: bool, u: np.ndarray, p: np.ndarray) -> SolveReport:
        report = monitor.report(converged, u, session.global_solves,
                                [session.patch_solves[s] for s in session.patch_ids], p)
        report.per_patch_recomputes = [session.patch_recomputes[s] for s in session.patch_ids]
        return report

    logger.info(f"[{variant}] {session.rank_count} ranks, groups {session.groups}, D={max_delay}, omega={omega:.4g}")
    session.launch(global_rank, patch_rank, watchdog)
    report = session.outcome["report"]
    # final counters, after every rank has stopped
    report.per_patch_solves = [session.patch_solves[s] for s in session.patch_ids]
    report.per_patch_recomputes = [session.patch_recomputes[s] for s in session.patch_ids]
    if report.converged:
        logger.info(f"[{variant}] converged: {report}")
    else:
        logger.warning(f"[{variant}] no convergence within {monitor.max_iter} steps: {report}")
    return report, trace


def run_sync_concurrent(
        scenario: CouplingScenario,
        omega: float = 1.0,
        tol: float | None = None,
        max_iter: int | None = None,
        rank_count: int | None = None,
        relaxation: TypeRelaxation = TypeRelaxation.Fixed,
        watchdog: float | None = None,
) -> SolveReport:
    """
    Synchronous iterations with fences: traces are put and fenced, every
    patch rank answers and fences, then the global rank updates the load and
    publishes the stop decision before the last fence of the epoch.
    """
    policy = make_relaxation(relaxation, omega)
    watchdog = settings.watchdog_seconds if watchdog is None else watchdog
    variant = str(TypeVariant.SyncConcurrent)
    session = _Session(scenario, rank_count, variant)
    session.barrier = threading.Barrier(session.rank_count, timeout=watchdog)
    monitor = IterationMonitor(scenario, tol, max_iter, variant)
    fence = session.barrier.wait

    def patch_rank(rank: int, group: list[int]):
        cell = session.u_cells[rank]
        while True:
            fence()
            snap = cell.get()
            for s in group:
                session.q_cells[s].put(subdomain_contribution(session.by_id[s], snap.payload), tag=snap.tag)
                session.patch_solves[s] += 1
            fence()
            fence()
            if session.control.version > 0:
                return

    def global_rank():
        p = np.zeros(scenario.interface_size)
        failure = None
        for j in range(monitor.max_iter + 1):
            u = global_solve(scenario, p)
            session.global_solves += 1
            session.publish_trace(u, j)
            fence()
            fence()
            snaps = {s: cell.get() for s, cell in session.q_cells.items()}
            residual = session.residual(u, snaps)
            norm = float(np.linalg.norm(residual))
            converged = monitor.converged(norm)
            omega_j = policy.omega if converged else policy.next(residual)
            monitor.record(j, p, residual, norm, omega_j)
            session.outcome["report"] = monitor.report(
                converged, u, session.global_solves,
                [session.patch_solves[s] for s in session.patch_ids], p,
            )
            done = converged or j >= monitor.max_iter
            if not converged and monitor.diverged(norm):
                failure = DivergenceError(
                    f"[{variant}] residual {norm:.3e} exceeds {monitor.divergence_factor:g} x |r0| at iteration {j}",
                    report=session.outcome["report"],
                )
                done = True
            if done:
                session.control.put(np.ones(1))
            else:
                p = relaxed_update(p, omega_j, residual)
            fence()
            if done:
                break
        if failure is not None:
            raise failure

    logger.info(f"[{variant}] {session.rank_count} ranks, groups {session.groups}")
    session.launch(global_rank, patch_rank, watchdog)
    report = session.outcome["report"]
    if report.converged:
        logger.info(f"[{variant}] converged: {report}")
    else:
        logger.warning(f"[{variant}] no convergence within {monitor.max_iter} iterations: {report}")
    return report
