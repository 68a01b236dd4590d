"""Moments, entropy, positivity error and relative error norms."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .grid import GridSpec, SpectralState

__all__ = [
    "CSV_COLUMNS",
    "DiagnosticsRecord",
    "convergence_table",
    "entropy",
    "entropy_with_flags",
    "lp_relative_error",
    "positivity_error",
    "record",
]

ZERO_TOL = 1e-14


def entropy_with_flags(values, grid: GridSpec) -> tuple[float, int]:
    """``h^d sum F ln F`` and the number of skipped negative samples.

    ``0 ln 0 = 0``; samples with ``|F| <= 1e-14`` contribute nothing, and
    samples below ``-1e-14`` are skipped and counted.
    """
    F = np.asarray(values, dtype=np.float64).ravel()
    pos = F > ZERO_TOL
    negative = int(np.count_nonzero(F < -ZERO_TOL))
    eta = float(np.sum(F[pos] * np.log(F[pos]))) * grid.h**grid.d
    return eta, negative


def entropy(values, grid: GridSpec) -> float:
    return entropy_with_flags(values, grid)[0]


def positivity_error(values) -> float:
    """``(sum |F| - sum F) / sum |F|``, zero iff no sample is negative."""
    F = np.asarray(values, dtype=np.float64).ravel()
    a = float(np.abs(F).sum())
    if a == 0.0:
        raise ValueError("positivity error undefined for an all-zero field")
    return (a - float(F.sum())) / a


def lp_relative_error(F, f, p) -> float:
    """``||F - f||_p / ||f||_p`` over the nodes, no quadrature weight."""
    F = np.asarray(F, dtype=np.float64).ravel()
    f = np.asarray(f, dtype=np.float64).ravel()
    if F.shape != f.shape:
        raise ValueError("numeric and exact samples must share a node set")
    if p in (np.inf, "inf", math.inf):
        num, den = np.abs(F - f).max(), np.abs(f).max()
    elif p in (1, 2):
        num = np.sum(np.abs(F - f) ** p) ** (1.0 / p)
        den = np.sum(np.abs(f) ** p) ** (1.0 / p)
    else:
        raise ValueError(f"p must be 1, 2 or inf, got {p!r}")
    if den == 0:
        raise ValueError("exact solution has zero norm")
    return float(num / den)


def convergence_table(errors: dict[int, float]) -> list[dict]:
    """Rows ``{N, error, rate}`` with ``rate = log2(e_N / e_2N)``.

    ``errors`` maps requested ``N`` to error; keys must form a doubling ladder.
    """
    Ns = sorted(errors)
    for a, b in zip(Ns, Ns[1:]):
        if b != 2 * a:
            raise ValueError(f"N values {Ns} are not a doubling ladder")
    rows, prev = [], None
    for N in Ns:
        e = float(errors[N])
        if not e > 0:
            raise ValueError(f"error at N={N} must be positive, got {e}")
        rows.append({"N": N, "error": e, "rate": None if prev is None else math.log2(prev / e)})
        prev = e
    return rows


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    mass: float
    momentum: tuple[float, ...]
    energy: float
    entropy: float
    positivity_error: float
    min_value: float
    negative_count: int

    def row(self) -> dict:
        out = asdict(self)
        mom = out.pop("momentum")
        for i, c in enumerate(("momentum_1", "momentum_2", "momentum_3")[: len(mom)]):
            out[c] = mom[i]
        return out


CSV_COLUMNS = (
    "time",
    "mass",
    "momentum_1",
    "momentum_2",
    "momentum_3",
    "energy",
    "entropy",
    "positivity_error",
    "min_value",
    "negative_count",
)


def record(state: SpectralState, values: np.ndarray | None = None) -> DiagnosticsRecord:
    """Diagnostics of a state (point values computed unless given)."""
    g = state.grid
    F = state.values if values is None else np.asarray(values)
    w = g.h**g.d
    vel = g.velocity_grid()
    eta, neg = entropy_with_flags(F, g)
    return DiagnosticsRecord(
        time=float(state.time),
        mass=float(F.sum() * w),
        momentum=tuple(float((F * v).sum() * w) for v in vel),
        energy=float((F * sum(v * v for v in vel)).sum() * w),
        entropy=eta,
        positivity_error=positivity_error(F),
        min_value=float(F.min()),
        negative_count=neg,
    )
