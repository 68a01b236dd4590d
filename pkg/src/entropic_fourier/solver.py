"""High-level driver: problem + method + resolution -> trajectory and errors."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .cache import load_or_build
from .collision import CollisionOperator, Method, MethodVariant, filtered_kernel_for
from .diagnostics import DiagnosticsRecord, lp_relative_error
from .grid import GridSpec, SpectralState
from .kernel import KernelSpec, build_kernel
from .problems import ProblemSpec, initialize
from .timestepper import TimeSpec, integrate

__all__ = ["RunResult", "Simulation", "errors_vs_exact", "solve"]


def errors_vs_exact(state: SpectralState, problem: ProblemSpec) -> dict[str, float]:
    """Relative l1, l2 and l_inf errors against the closed-form solution."""
    g = state.grid
    exact = problem.exact(state.time, np.stack(g.velocity_grid(), axis=-1))
    F = state.values
    return {
        "l1": lp_relative_error(F, exact, 1),
        "l2": lp_relative_error(F, exact, 2),
        "linf": lp_relative_error(F, exact, np.inf),
    }


@dataclass
class Simulation:
    """Everything needed to advance one configuration in time."""

    problem: ProblemSpec
    method: Method
    grid: GridSpec
    operator: CollisionOperator
    initial: SpectralState
    kernel_status: str = "miss"

    @classmethod
    def setup(
        cls,
        problem: ProblemSpec | str,
        method: Method | MethodVariant | str,
        N: int,
        *,
        R: float = 6.0,
        T: float | None = None,
        M: int = 8,
        M_r: int = 64,
        init: str | None = None,
        eps: float | None = None,
        allow_aliasing: bool = False,
        cache_dir=None,
        use_cache: bool = False,
        path: str = "auto",
    ) -> Simulation:
        problem = problem if isinstance(problem, ProblemSpec) else ProblemSpec(problem)
        if not isinstance(method, Method):
            method = Method(MethodVariant.parse(method), init)
        elif init is not None:
            method = Method(method.variant, init)
        form = "carleman" if problem.d == 2 else "classical"
        grid = GridSpec(problem.d, N, R, T, form=form, allow_aliasing=allow_aliasing)
        spec = KernelSpec.for_grid(grid, M=M, M_r=M_r)
        if use_cache:
            kernel, status = load_or_build(spec, cache_dir)
        else:
            kernel, status = build_kernel(spec), "uncached"
        op = CollisionOperator(filtered_kernel_for(kernel, method.variant), method.variant, path)
        state = initialize(problem, grid, method.init, eps)
        return cls(problem, method, grid, op, state, status)

    def run(self, timespec: TimeSpec, observers=()) -> RunResult:
        t0 = time.perf_counter()
        final, records = integrate(self.initial, self.operator, timespec, observers)
        elapsed = time.perf_counter() - t0
        errors = errors_vs_exact(final, self.problem) if self.problem.has_exact else {}
        return RunResult(final, records, errors, elapsed, self.operator.evaluations)


@dataclass
class RunResult:
    final: SpectralState
    records: list[DiagnosticsRecord]
    errors: dict[str, float] = field(default_factory=dict)
    runtime: float = 0.0
    evaluations: int = 0


def solve(problem, method, N: int, t_end: float, dt: float = 0.01, **kwargs) -> RunResult:
    """One-call convenience wrapper around :class:`Simulation`."""
    sim = Simulation.setup(problem, method, N, **kwargs)
    return sim.run(TimeSpec(dt=dt, t_end=t_end))
