"""Third-order SSP Runge-Kutta integration of ``dFhat/dt = Qhat[Fhat]``."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .diagnostics import DiagnosticsRecord, record
from .grid import SpectralState

__all__ = ["NumericalError", "TimeSpec", "integrate", "ssprk3_step"]


class NumericalError(FloatingPointError):
    """Non-finite values appeared; ``dump`` holds the offending arrays."""

    def __init__(self, message: str, dump: dict):
        super().__init__(message)
        self.dump = dump


@dataclass(frozen=True)
class TimeSpec:
    dt: float = 0.01
    t_end: float = 1.0
    output_every: int = 1  # steps between observer calls

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be non-negative")
        if self.output_every < 1:
            raise ValueError("output_every must be >= 1")

    @property
    def steps(self) -> int:
        # tolerate t_end / dt landing a hair off an integer
        return int(math.ceil(self.t_end / self.dt - 1e-9))


def _finite(u, stage: str, t: float, u0):
    if not np.all(np.isfinite(u)):
        raise NumericalError(
            f"non-finite values in stage {stage} at t={t:.6g}", {"t": t, "stage": stage, "start": u0, "stage_value": u}
        )
    return u


def ssprk3_step(u: np.ndarray, rhs: Callable[[np.ndarray], np.ndarray], dt: float, t: float = 0.0) -> np.ndarray:
    """One Shu-Osher SSP-RK3 step; every stage is a convex mix of Euler steps."""
    u1 = _finite(u + dt * rhs(u), "1", t, u)
    u2 = _finite(0.75 * u + 0.25 * (u1 + dt * rhs(u1)), "2", t, u)
    return _finite(u / 3.0 + 2.0 / 3.0 * (u2 + dt * rhs(u2)), "3", t, u)


Observer = Callable[[SpectralState, DiagnosticsRecord], None]


def integrate(
    state: SpectralState,
    rhs: Callable[[np.ndarray], np.ndarray],
    timespec: TimeSpec,
    observers: Sequence[Observer] = (),
) -> tuple[SpectralState, list[DiagnosticsRecord]]:
    """Step to ``t_end`` and return the final state and the diagnostics trail.

    A record is taken at the start, every ``output_every`` steps and at the
    end; observers see each state alongside its record.  A final partial step
    lands exactly on ``t_end``.
    """
    records: list[DiagnosticsRecord] = []

    def emit(s: SpectralState):
        rec = record(s)
        records.append(rec)
        for obs in observers:
            obs(s, rec)

    emit(state)
    t0 = state.time
    u = state.modes
    nsteps = timespec.steps
    for i in range(nsteps):
        t = t0 + i * timespec.dt
        dt = min(timespec.dt, t0 + timespec.t_end - t)
        u = ssprk3_step(u, rhs, dt, t)
        last = i == nsteps - 1
        if last or (i + 1) % timespec.output_every == 0:
            tn = t0 + timespec.t_end if last else t0 + (i + 1) * timespec.dt
            state = state.with_modes(u, tn)
            emit(state)
    return state, records
