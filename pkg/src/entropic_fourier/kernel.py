"""Fourier modes of the Maxwell-molecule collision kernel.

Two constructions are provided.

2D (Carleman form, ``B = 1/(2 pi)`` so ``Btilde = 1/pi``)
    ``Bhat(l, m) = Btilde * int_0^pi psi_R(l, e_theta) psi_R(m, e_theta+pi/2) dtheta``
    with ``psi_R(l, e) = 2R Sinc(pi R l.e / T)``.  The angular integral is folded
    onto ``[0, pi/2)`` and sampled at ``M`` midpoints; each node contributes the
    symmetric pair ``psi(l,e)psi(m,e') + psi(l,e')psi(m,e)``, so the factored
    kernel has ``2M`` rank-one terms and is exactly symmetric in ``l <-> m``.

3D (classical form, ``B = 1/(4 pi)``)
    ``Bhat(l, m) = Phi(|l+m|, |l-m|)`` with
    ``Phi(a, b) = 4 pi int_0^R r^2 Sinc(pi r a / 2T) Sinc(pi r b / 2T) dr``,
    tabulated over the integer squares ``a^2, b^2`` by Gauss-Legendre quadrature.

Filtering multiplies ``Bhat(l, m)`` by ``sigma(l) sigma(m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .filters import FilterWeights
from .grid import GridSpec

__all__ = [
    "FilteredKernel",
    "KernelFactors2D",
    "KernelSpec",
    "KernelTable3D",
    "apply_filter",
    "build_kernel",
    "build_kernel_2d",
    "build_kernel_3d",
    "psi_R",
]

MODELS = {"maxwell-2d": 2, "maxwell-3d": 3}
DENSE_LIMIT = 2_000_000  # max entries of a materialised (N^d x N^d) kernel


@dataclass(frozen=True)
class KernelSpec:
    """Everything that determines a kernel table (and its cache key)."""

    d: int
    N: int
    R: float
    T: float
    model: str = ""
    M: int = 8
    M_r: int = 64

    def __post_init__(self):
        model = self.model or f"maxwell-{self.d}d"
        object.__setattr__(self, "model", model)
        if MODELS.get(model) != self.d:
            raise ValueError(f"model {model!r} inconsistent with d={self.d}")
        if self.N % 2 == 0:
            raise ValueError("KernelSpec takes the odd working N of a GridSpec")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if self.M_r < 8:
            raise ValueError("M_r must be >= 8")

    @classmethod
    def for_grid(cls, grid: GridSpec, M: int = 8, M_r: int = 64) -> KernelSpec:
        return cls(grid.d, grid.N, grid.R, grid.T, f"maxwell-{grid.d}d", M, M_r)

    def grid(self) -> GridSpec:
        form = "carleman" if self.d == 2 else "classical"
        return GridSpec(self.d, self.N, self.R, self.T, form=form, allow_aliasing=True)

    def key(self) -> dict:
        key = {"d": self.d, "N": self.N, "R": self.R, "T": self.T, "model": self.model}
        key["M" if self.d == 2 else "M_r"] = self.M if self.d == 2 else self.M_r
        return key


def psi_R(l, e, R: float, T: float) -> np.ndarray:
    """``int_{-R}^{R} E_l(rho e) drho = 2R Sinc(pi R (l.e) / T)``.

    ``l`` has shape ``(..., d)``; ``e`` is a unit vector of length ``d``.
    """
    e = np.asarray(e, dtype=np.float64)
    if abs(np.linalg.norm(e) - 1.0) > 1e-12:
        raise ValueError("e must be a unit vector")
    le = np.tensordot(np.asarray(l, dtype=np.float64), e, axes=([-1], [0]))
    # np.sinc(x) = sin(pi x)/(pi x)
    return 2.0 * R * np.sinc(R * le / T)


@dataclass(frozen=True)
class KernelFactors2D:
    """Low-rank 2D kernel ``Bhat(l, m) = sum_t w_t beta_t(l) gamma_t(m)``.

    ``beta`` and ``gamma`` have shape ``(2M, N, N)``; ``weights`` has ``2M``
    entries.  ``theta`` lists the ``M`` angular nodes on ``[0, pi/2)``.
    """

    spec: KernelSpec
    theta: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    weights: np.ndarray

    @property
    def grid(self) -> GridSpec:
        return self.spec.grid()

    def dense(self) -> np.ndarray:
        """Materialised ``(N^2, N^2)`` matrix in storage order."""
        S = self.beta[0].size
        if S * S > DENSE_LIMIT * 4:
            raise MemoryError(f"dense 2D kernel with {S}^2 entries refused")
        b = self.beta.reshape(len(self.weights), S)
        g = self.gamma.reshape(len(self.weights), S)
        return (b.T * self.weights) @ g

    def diagonal(self) -> np.ndarray:
        return np.einsum("t,t...,t...->...", self.weights, self.beta, self.gamma)

    def entry(self, l, m) -> float:
        g = self.grid
        il, im = g.index_of(l), g.index_of(m)
        return float(sum(w * b[il] * c[im] for w, b, c in zip(self.weights, self.beta, self.gamma)))

    def arrays(self) -> dict[str, np.ndarray]:
        return {"theta": self.theta, "beta": self.beta, "gamma": self.gamma, "weights": self.weights}


@dataclass(frozen=True)
class KernelTable3D:
    """``Phi[a2, b2]`` with ``Bhat(l, m) = Phi[|l+m|^2, |l-m|^2]``."""

    spec: KernelSpec
    phi: np.ndarray

    @property
    def grid(self) -> GridSpec:
        return self.spec.grid()

    def entry(self, l, m) -> float:
        l = np.asarray(l)
        m = np.asarray(m)
        return float(self.phi[int(np.sum((l + m) ** 2)), int(np.sum((l - m) ** 2))])

    def dense(self) -> np.ndarray:
        g = self.grid
        C = g.mode_coords()
        S = len(C)
        if S * S > DENSE_LIMIT:
            raise MemoryError(f"dense 3D kernel with {S}^2 entries refused (N={g.N})")
        a2 = ((C[:, None, :] + C[None, :, :]) ** 2).sum(-1)
        b2 = ((C[:, None, :] - C[None, :, :]) ** 2).sum(-1)
        return self.phi[a2, b2]

    def diagonal(self) -> np.ndarray:
        g = self.grid
        C = g.mode_coords()
        return self.phi[4 * (C**2).sum(-1), 0].reshape(g.shape)

    def arrays(self) -> dict[str, np.ndarray]:
        return {"phi": self.phi}


def _theta_nodes(M: int) -> np.ndarray:
    return (np.arange(M) + 0.5) * (np.pi / 2) / M


def build_kernel_2d(spec: KernelSpec) -> KernelFactors2D:
    """Factored 2D Maxwell kernel with ``M`` midpoint nodes on ``[0, pi/2)``."""
    if spec.d != 2:
        raise ValueError("build_kernel_2d needs d = 2")
    grid = spec.grid()
    modes = np.stack(grid.mode_grid(), axis=-1).astype(np.float64)
    theta = _theta_nodes(spec.M)
    btilde = 1.0 / math.pi  # 2^(d-1) B with B = 1/(2 pi)
    beta, gamma = [], []
    for th in theta:
        e = np.array([math.cos(th), math.sin(th)])
        ep = np.array([-math.sin(th), math.cos(th)])
        pe = psi_R(modes, e, spec.R, spec.T)
        pp = psi_R(modes, ep, spec.R, spec.T)
        beta += [pe, pp]
        gamma += [pp, pe]
    # midpoint weight on [0, pi): pi / (2M) per node, times Btilde
    w = np.full(2 * spec.M, btilde * math.pi / (2 * spec.M))
    return KernelFactors2D(spec, theta, np.array(beta), np.array(gamma), w)


def _phi_table(spec: KernelSpec) -> np.ndarray:
    n = (spec.N - 1) // 2
    amax = 3 * (2 * n) ** 2
    x, wq = np.polynomial.legendre.leggauss(spec.M_r)
    r = 0.5 * spec.R * (x + 1.0)
    wq = 0.5 * spec.R * wq
    a = np.sqrt(np.arange(amax + 1, dtype=np.float64))
    # Sinc(pi r a / 2T) = np.sinc(r a / 2T)
    S = r * np.sinc(np.outer(a, r) / (2.0 * spec.T))
    phi = 4.0 * math.pi * (S * wq) @ S.T
    return 0.5 * (phi + phi.T)


def build_kernel_3d(spec: KernelSpec) -> KernelTable3D:
    """Radially reduced 3D Maxwell kernel table."""
    if spec.d != 3:
        raise ValueError("build_kernel_3d needs d = 3")
    return KernelTable3D(spec, _phi_table(spec))


def build_kernel(spec: KernelSpec):
    return build_kernel_2d(spec) if spec.d == 2 else build_kernel_3d(spec)


@dataclass(frozen=True)
class FilteredKernel:
    """``Bhat_sigma(l, m) = Bhat(l, m) sigma(l) sigma(m)``.

    For factored kernels the weights are folded into ``beta``/``gamma``; for
    tables they are applied on lookup.
    """

    base: KernelFactors2D | KernelTable3D
    filter: FilterWeights
    sigma: np.ndarray = field(repr=False)
    beta: np.ndarray | None = field(default=None, repr=False)
    gamma: np.ndarray | None = field(default=None, repr=False)

    @property
    def grid(self) -> GridSpec:
        return self.base.grid

    @property
    def factored(self) -> bool:
        return isinstance(self.base, KernelFactors2D)

    @property
    def weights(self) -> np.ndarray:
        return self.base.weights

    def dense(self) -> np.ndarray:
        s = self.sigma.ravel()
        if self.factored:
            S = s.size
            w = self.base.weights
            return (self.beta.reshape(len(w), S).T * w) @ self.gamma.reshape(len(w), S)
        return self.base.dense() * np.outer(s, s)

    def diagonal(self) -> np.ndarray:
        """Loss vector ``D_m = Bhat_sigma(m, m)``."""
        return self.sigma**2 * self.base.diagonal()

    def entry(self, l, m) -> float:
        g = self.grid
        return self.base.entry(l, m) * self.sigma[g.index_of(l)] * self.sigma[g.index_of(m)]


def apply_filter(kernel, weights: FilterWeights) -> FilteredKernel:
    """Attach filter weights to a kernel (``kind='none'`` leaves values unchanged)."""
    g = kernel.grid
    if weights.n != g.n:
        raise ValueError(f"filter half-width {weights.n} does not match grid n={g.n}")
    sigma = weights.tensor(g.d)
    if isinstance(kernel, KernelFactors2D):
        return FilteredKernel(kernel, weights, sigma, kernel.beta * sigma, kernel.gamma * sigma)
    return FilteredKernel(kernel, weights, sigma)
