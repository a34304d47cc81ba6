"""Hierarchical Subspace Iteration Method and the single-level SIM baseline."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .hierarchy import DEFAULT_SIGMA, Hierarchy, build_hierarchy, prolong_block
from .kernel import dense_generalized_eig
from .mesh import EdgeGraph, TriangleMesh
from .operators import OperatorPair
from .sim import (
    EigenSolution,
    NormMode,
    SimConfig,
    choose_shift,
    initial_basis,
    residuals,
    sim_solve,
    subspace_dimension,
)

log = logging.getLogger(__name__)


@dataclass
class HsimConfig:
    p: int
    eps: float = 1e-2
    T: int = 0  # 0 picks the level count from p
    sigma: float = DEFAULT_SIGMA
    alpha: float = 0.1
    seed: int = 42
    start: int | None = None
    threads: int = 1
    max_iterations: int = 50

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.T < 0:
            raise ValueError("T must be >= 0")


@dataclass
class HsimReport:
    """Per-level iteration counts listed coarsest first; ``"F"`` marks the dense solve."""

    levels: list = field(default_factory=list)
    dims: list[int] = field(default_factory=list)
    shifts: list[float] = field(default_factory=list)
    hierarchy_seconds: float = 0.0
    solve_seconds: float = 0.0
    lock_schedules: list = field(default_factory=list)
    traces: list = field(default_factory=list)

    @property
    def iteration_string(self) -> str:
        return "|".join(str(x) for x in self.levels)

    @property
    def total_seconds(self) -> float:
        return self.hierarchy_seconds + self.solve_seconds

    @property
    def finest_iterations(self) -> int:
        last = self.levels[-1]
        return 0 if last == "F" else int(last)


def _finish(ops_s, ops_m, lam, phi, p, iterations, shift=0.0) -> EigenSolution:
    res = residuals(ops_s, ops_m, lam, phi, NormMode.M_INVERSE)
    return EigenSolution(lam, phi, res, iterations, p, shift).truncated(p)


def dense_solve(s, m, count: int) -> tuple[np.ndarray, np.ndarray]:
    w, x = dense_generalized_eig(s.toarray(), m.toarray())
    return w[:count], x[:, :count]


def hsim_solve(
    mesh: TriangleMesh,
    ops: OperatorPair,
    config: HsimConfig,
    graph: EdgeGraph | None = None,
    hierarchy: Hierarchy | None = None,
    schedules: list | None = None,
) -> tuple[EigenSolution, HsimReport]:
    """Lowest ``p`` eigenpairs of ``(S, M)`` by coarse-to-fine subspace iterations.

    ``schedules`` replays the per-level lock schedules of an earlier run
    without convergence tests (used for timing).
    """
    report = HsimReport()
    t0 = time.perf_counter()
    h = hierarchy or build_hierarchy(
        mesh, ops, config.p, config.T, config.sigma, seed=config.seed, start=config.start, graph=graph
    )
    t1 = time.perf_counter()
    report.hierarchy_seconds = t1 - t0
    report.dims = list(reversed(h.dims))

    p = min(config.p, ops.n)
    top = h.T - 1
    q = min(subspace_dimension(p), h.dims[top])
    lam, phi = dense_solve(h.stiffness[top], h.mass[top], q)
    report.levels.append("F")
    if h.T == 1:
        sol = _finish(ops.stiffness, ops.mass, lam, phi, p, 0)
        report.solve_seconds = time.perf_counter() - t1
        return sol, report

    sol = None
    for t in range(top - 1, -1, -1):
        phi = prolong_block(h.prolongations[t], phi)
        mu = choose_shift(lam, p, config.alpha)
        cfg = SimConfig(
            p=p,
            q=q,
            eps=config.eps,
            shift=mu,
            norm_mode=NormMode.M_INVERSE if t == 0 else NormMode.STANDARD,
            max_iterations=config.max_iterations,
            double_step=True,
            lock=True,
            threads=config.threads,
            lock_schedule=None if schedules is None else schedules[top - 1 - t],
        )
        try:
            sol = sim_solve(h.stiffness[t], h.mass[t], phi, cfg)
        except NumericalError as exc:
            raise type(exc)(f"level {t}: {exc}") from exc
        log.info("level %d (n=%d, shift %.4g): %d iterations", t, h.dims[t], sol.shift, sol.iterations)
        report.levels.append(sol.iterations)
        report.shifts.append(sol.shift)
        report.lock_schedules.append(sol.lock_schedule)
        report.traces.append(sol.trace)
        lam, phi = sol.eigenvalues, sol.eigenvectors
    report.solve_seconds = time.perf_counter() - t1
    return sol.truncated(p), report


def sim_baseline_solve(
    ops: OperatorPair,
    p: int,
    eps: float = 1e-2,
    seed: int = 42,
    threads: int = 1,
    max_iterations: int = 50,
    schedule: list | None = None,
) -> tuple[EigenSolution, HsimReport]:
    """Plain single-level SIM: heuristic start block, zero shift, one inverse
    iteration per projection, no locking."""
    report = HsimReport()
    t1 = time.perf_counter()
    n = ops.n
    p = min(p, n)
    q = min(subspace_dimension(p), n)
    phi0 = initial_basis(ops.stiffness, ops.mass, q, seed)
    cfg = SimConfig(
        p=p,
        q=q,
        eps=eps,
        shift=0.0,
        norm_mode=NormMode.M_INVERSE,
        max_iterations=max_iterations,
        double_step=False,
        lock=False,
        threads=threads,
        lock_schedule=schedule,
    )
    sol = sim_solve(ops.stiffness, ops.mass, phi0, cfg)
    report.levels.append(sol.iterations)
    report.dims.append(n)
    report.shifts.append(sol.shift)
    report.lock_schedules.append(sol.lock_schedule)
    report.traces.append(sol.trace)
    report.solve_seconds = time.perf_counter() - t1
    return sol.truncated(p), report
