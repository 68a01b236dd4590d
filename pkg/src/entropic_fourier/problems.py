"""Test problems: exact BKW solutions and the initial data of the experiments.

Densities take velocities as arrays of shape ``(..., d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .grid import GridSpec, SpectralState, forward_dft

__all__ = [
    "PROBLEMS",
    "ProblemSpec",
    "ProjectionError",
    "bigaussian_2d",
    "bkw_2d",
    "bkw_3d",
    "derive_parameters",
    "discontinuous_2d",
    "initialize",
    "mollify",
    "project",
]

PROBLEMS = ("bkw2d", "bkw3d", "bigaussian2d", "discontinuous2d")
RHO1 = 6.0 / 5.0


class ProjectionError(RuntimeError):
    """Oversampled projection quadrature did not settle."""


def _r2(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return np.sum(v * v, axis=-1)


def bkw_2d(t: float, v) -> np.ndarray:
    if t < 0:
        raise ValueError("t must be non-negative")
    S = 1.0 - math.exp(-t / 8.0) / 2.0
    r2 = _r2(v)
    return np.exp(-r2 / (2 * S)) / (2 * math.pi * S) * ((2 * S - 1) / S + (1 - S) / (2 * S * S) * r2)


def bkw_3d(t: float, v) -> np.ndarray:
    if t < 0:
        raise ValueError("t must be non-negative")
    S = 1.0 - 2.0 * math.exp(-t / 6.0) / 5.0
    r2 = _r2(v)
    return np.exp(-r2 / (2 * S)) / (2 * math.pi * S) ** 1.5 * ((5 * S - 3) / (2 * S) + (1 - S) / (2 * S * S) * r2)


def bigaussian_2d(v, u1=(-2.0, 0.0), u2=(2.0, 0.0)) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    a = _r2(v - np.asarray(u1))
    b = _r2(v - np.asarray(u2))
    return (np.exp(-a / 2) + np.exp(-b / 2)) / (4 * math.pi)


def derive_parameters(rho1: float = RHO1) -> tuple[float, float, float]:
    """``(rho2, T1, T2)`` from unit mass, unit energy and zero momentum.

    Mass gives ``rho2 = 2 - rho1``; zero momentum ``rho1 sqrt(T1) = rho2 sqrt(T2)``
    gives ``T1 = (rho2/rho1)^2 T2``; the energy ``(rho1 T1 + rho2 T2)/2 = 1`` then
    fixes ``T2 = 2 rho1 / (rho2 (rho1 + rho2))``.
    """
    if not 0 < rho1 < 2:
        raise ValueError("rho1 must lie in (0, 2)")
    rho2 = 2.0 - rho1
    T2 = 2.0 * rho1 / (rho2 * (rho1 + rho2))
    T1 = (rho2 / rho1) ** 2 * T2
    return rho2, T1, T2


def _half_maxwellians(rho1: float):
    rho2, T1, T2 = derive_parameters(rho1)
    return (rho1, T1), (rho2, T2)


def discontinuous_2d(v, rho1: float = RHO1) -> np.ndarray:
    """Two half-plane Maxwellians joined at ``v_1 = 0`` (mean value on the line)."""
    v = np.asarray(v, dtype=np.float64)
    (r1, T1), (r2, T2) = _half_maxwellians(rho1)
    r2v = _r2(v)
    right = r1 / (2 * math.pi * T1) * np.exp(-r2v / (2 * T1))
    left = r2 / (2 * math.pi * T2) * np.exp(-r2v / (2 * T2))
    v1 = v[..., 0]
    return np.where(v1 > 0, right, np.where(v1 < 0, left, 0.5 * (left + right)))


# ------------------------------------------------------------------ mollifier

_GL_NODES = 48


def _segments(centre: np.ndarray, eps: float, cut: float | None):
    """Gauss-Legendre nodes/weights on ``[c - 6 eps, c + 6 eps]``, split at ``cut``."""
    x, w = np.polynomial.legendre.leggauss(_GL_NODES)
    lo, hi = centre - 6 * eps, centre + 6 * eps
    if cut is None:
        bounds = [(lo, hi)]
    else:
        mid = np.clip(cut, lo, hi)
        bounds = [(lo, mid), (mid, hi)]
    ys, ws = [], []
    for a, b in bounds:
        half = 0.5 * (b - a)
        ys.append(0.5 * (a + b)[:, None] + half[:, None] * x[None, :])
        ws.append(half[:, None] * w[None, :])
    return np.concatenate(ys, axis=1), np.concatenate(ws, axis=1)


def _gauss_weights(y: np.ndarray, centre: np.ndarray, wq: np.ndarray, eps: float) -> np.ndarray:
    # truncated Gaussian, normalised under the same quadrature
    w = wq * np.exp(-((y - centre[:, None]) ** 2) / (2 * eps * eps))
    return w / w.sum(axis=1, keepdims=True)


def _mollify_1d(centre, eps, fun, cut=None) -> np.ndarray:
    y, wq = _segments(centre, eps, cut)
    return np.sum(_gauss_weights(y, centre, wq, eps) * fun(y), axis=1)


def mollify(f, points: np.ndarray, eps: float, cut: float | None = 0.0) -> np.ndarray:
    """``(phi_eps * f)`` at 2D ``points`` by tensor Gauss-Legendre quadrature.

    ``phi_eps`` is a Gaussian of standard deviation ``eps`` truncated to
    ``[-6 eps, 6 eps]^2``.  The first coordinate is split at ``cut``, where
    ``f`` may jump.  Cost is ``O(len(points) * 96^2)``.
    """
    if eps <= 0:
        raise ValueError("mollifier width must be positive")
    P = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    y1, w1 = _segments(P[:, 0], eps, cut)
    y2, w2 = _segments(P[:, 1], eps, None)
    g1 = _gauss_weights(y1, P[:, 0], w1, eps)
    g2 = _gauss_weights(y2, P[:, 1], w2, eps)
    vals = f(np.stack(np.broadcast_arrays(y1[:, :, None], y2[:, None, :]), axis=-1))
    out = np.einsum("pi,pj,pij->p", g1, g2, vals)
    return out.reshape(np.asarray(points).shape[:-1])


def _mollified_discontinuous(points: np.ndarray, eps: float, rho1: float) -> np.ndarray:
    """Separable fast path: each half is a product of 1D Gaussians."""
    P = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    out = np.zeros(len(P))
    for (rho, T), side in zip(_half_maxwellians(rho1), (1.0, -1.0)):
        c = rho / (2 * math.pi * T)
        g = lambda y, T=T: np.exp(-(y**2) / (2 * T))  # noqa: E731
        h1 = _mollify_1d(P[:, 0], eps, lambda y, g=g, s=side: g(y) * (s * y > 0), cut=0.0)
        h2 = _mollify_1d(P[:, 1], eps, g)
        out += c * h1 * h2
    return out.reshape(np.asarray(points).shape[:-1])


# ------------------------------------------------------------------ problems


@dataclass(frozen=True)
class ProblemSpec:
    """One of the four experiments and its parameters."""

    name: str
    u1: tuple[float, float] = (-2.0, 0.0)
    u2: tuple[float, float] = (2.0, 0.0)
    rho1: float = RHO1
    eps: float | None = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.name not in PROBLEMS:
            raise ValueError(f"unknown problem {self.name!r}; expected one of {PROBLEMS}")
        if self.eps is not None and self.eps <= 0:
            raise ValueError("mollifier width must be positive")
        if self.name == "discontinuous2d":
            rho2, T1, T2 = derive_parameters(self.rho1)
            self.params.update(rho1=self.rho1, rho2=rho2, T1=T1, T2=T2)

    @property
    def d(self) -> int:
        return 3 if self.name == "bkw3d" else 2

    @property
    def discontinuous(self) -> bool:
        return self.name == "discontinuous2d"

    @property
    def has_exact(self) -> bool:
        return self.name.startswith("bkw")

    def initial(self, v) -> np.ndarray:
        if self.name == "bkw2d":
            return bkw_2d(0.0, v)
        if self.name == "bkw3d":
            return bkw_3d(0.0, v)
        if self.name == "bigaussian2d":
            return bigaussian_2d(v, self.u1, self.u2)
        return discontinuous_2d(v, self.rho1)

    def exact(self, t: float, v) -> np.ndarray:
        if self.name == "bkw2d":
            return bkw_2d(t, v)
        if self.name == "bkw3d":
            return bkw_3d(t, v)
        raise ValueError(f"problem {self.name!r} has no closed-form solution")


# ------------------------------------------------------------- initializers


def _nodes(grid: GridSpec) -> np.ndarray:
    return np.stack(grid.velocity_grid(), axis=-1)


def _fourier_1d(fun, a: float, b: float, grid: GridSpec, nodes: int) -> np.ndarray:
    """``(2T)^{-1} int_a^b fun(y) E_{-k}(y) dy`` for ``k in [-n, n]``."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    y = 0.5 * (a + b) + 0.5 * (b - a) * x
    w = 0.5 * (b - a) * w * fun(y)
    return np.exp(-1j * np.pi * np.outer(grid.k1d, y) / grid.T) @ w / (2 * grid.T)


def _project_discontinuous(problem: ProblemSpec, grid: GridSpec, factor: int) -> np.ndarray:
    # each half is a product of 1D Gaussians; integrate each factor on smooth pieces
    q = factor * grid.N
    T = grid.T
    modes = np.zeros(grid.shape, dtype=np.complex128)
    for (rho, Tm), (a, b) in zip(_half_maxwellians(problem.rho1), ((0.0, T), (-T, 0.0))):
        g = lambda y, Tm=Tm: np.exp(-(y**2) / (2 * Tm))  # noqa: E731
        f1 = _fourier_1d(g, a, b, grid, q)
        f2 = _fourier_1d(g, -T, 0.0, grid, q) + _fourier_1d(g, 0.0, T, grid, q)
        modes += rho / (2 * math.pi * Tm) * np.outer(f1, f2)
    return modes


def _project_once(problem: ProblemSpec, grid: GridSpec, factor: int) -> np.ndarray:
    if problem.discontinuous:
        return _project_discontinuous(problem, grid, factor)
    L = factor * grid.N
    if L % 2:
        L += 1
    # periodic trapezoid on v_j = -T + 2T j / L; E_{-k}(v_j) = (-1)^k exp(-2 pi i k j / L)
    x = -grid.T + 2.0 * grid.T * np.arange(L) / L
    pts = np.stack(np.meshgrid(*([x] * grid.d), indexing="ij"), axis=-1)
    vals = problem.initial(pts)
    c = sfft.fftn(vals) / float(L) ** grid.d
    idx = np.concatenate([np.arange(L - grid.n, L), np.arange(0, grid.n + 1)])
    modes = c[np.ix_(*([idx] * grid.d))]
    sign = (-1.0) ** np.abs(grid.k1d)
    for ax in range(grid.d):
        shape = [1] * grid.d
        shape[ax] = grid.N
        modes = modes * sign.reshape(shape)
    return modes


def project(problem: ProblemSpec, grid: GridSpec, oversample: int = 4, rtol: float = 1e-3) -> SpectralState:
    """Fourier coefficients of ``f0`` on ``D_T`` truncated to ``K``.

    The quadrature is repeated at twice the oversampling; a relative change
    above ``rtol`` (max norm over ``K``) raises :class:`ProjectionError`.
    """
    m1 = _project_once(problem, grid, oversample)
    m2 = _project_once(problem, grid, 2 * oversample)
    change = np.abs(m1 - m2).max() / np.abs(m2).max()
    if change > rtol:
        raise ProjectionError(f"projection quadrature changed by {change:.2e} (> {rtol:g}) on refinement")
    # enforce exact Hermitian symmetry of the truncated coefficients
    flip = tuple(slice(None, None, -1) for _ in range(grid.d))
    modes = 0.5 * (m1 + np.conj(m1[flip]))
    return SpectralState(modes, grid, 0.0)


def interpolate(problem: ProblemSpec, grid: GridSpec, eps: float | None = None) -> SpectralState:
    """Point samples at ``X`` (mollified first for discontinuous data)."""
    pts = _nodes(grid)
    if problem.discontinuous:
        eps = eps if eps is not None else (problem.eps if problem.eps is not None else grid.h)
        if eps <= 0:
            raise ValueError("discontinuous data need a positive mollifier width")
        vals = _mollified_discontinuous(pts, eps, problem.rho1)
    else:
        vals = problem.initial(pts)
    return forward_dft(vals, grid)


def initialize(problem: ProblemSpec, grid: GridSpec, mode: str = "interpolation", eps: float | None = None) -> SpectralState:
    if problem.d != grid.d:
        raise ValueError(f"problem {problem.name} is {problem.d}D but the grid is {grid.d}D")
    if mode == "interpolation":
        return interpolate(problem, grid, eps)
    if mode == "projection":
        return project(problem, grid)
    raise ValueError(f"unknown initializer {mode!r}")
