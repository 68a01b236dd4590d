"""Discrete-velocity form of the spectral collision operator (small-N oracle).

On the collocation grid the aliased method is a discrete velocity model

    Q_r = sum_{p, q, s} A^{rs}_{pq} (F_p F_q - F_r F_s),
    A^{rs}_{pq} = N^{-2d} 1_N(r + s - p - q) G(p - s, q - s),
    G(y, z) = sum_{i, j in K} Bhat(i, j) E_{-i}(y) E_{-j}(z).

Everything here is brute force (``O(N^{3d})`` coefficients), guarded to
``N <= 9`` in 2D and ``N <= 5`` in 3D.  Only the support ``s = p + q - r``
(mod N) is stored, so ``A`` is the array ``values[r, p, q]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grid import GridSpec, symmetric_mod

__all__ = [
    "DVMCoefficients",
    "GTable",
    "MAX_N",
    "build_A",
    "build_G",
    "evaluate_G",
    "loss_row_sums",
    "q_dvm",
]

MAX_N = {2: 9, 3: 5}


def _guard(g: GridSpec) -> None:
    if g.N > MAX_N[g.d]:
        raise MemoryError(f"DVM oracle limited to N <= {MAX_N[g.d]} in {g.d}D, got N={g.N}")


@dataclass(frozen=True)
class GTable:
    """``G`` at all pairs of grid differences.

    ``values`` has shape ``(N,)*d + (N,)*d``; index ``(y + n, z + n)`` holds
    ``G(h y, h z)`` for integer offsets ``y, z in [-n, n]^d`` (periodic).
    """

    grid: GridSpec
    values: np.ndarray
    filtered: bool

    def at(self, y, z) -> float:
        g = self.grid
        y = symmetric_mod(tuple(y), g.N)
        z = symmetric_mod(tuple(z), g.N)
        return float(self.values[g.index_of(y) + g.index_of(z)])

    @property
    def min(self) -> float:
        return float(self.values.min())


def build_G(kernel, imag_tol: float = 1e-12) -> GTable:
    """Tabulate ``G`` by a ``2d``-dimensional DFT of the dense kernel."""
    g = kernel.grid
    _guard(g)
    B = kernel.dense().reshape(g.shape + g.shape)
    axes = tuple(range(2 * g.d))
    # sum_{i,j} B(i,j) exp(-2 pi i (i.y + j.z)/N): forward FFT without scaling
    G = sfft.fftshift(sfft.fftn(sfft.ifftshift(B, axes=axes), axes=axes), axes=axes)
    scale = max(np.abs(G.real).max(), np.finfo(float).tiny)
    if np.abs(G.imag).max() > imag_tol * scale:
        raise ValueError(f"G has imaginary residue {np.abs(G.imag).max():.3e}; kernel not symmetric")
    kind = getattr(getattr(kernel, "filter", None), "kind", "none")
    return GTable(g, np.ascontiguousarray(_symmetrize(G.real, g.d)), kind != "none")


def _symmetrize(G: np.ndarray, d: int) -> np.ndarray:
    """Make ``G(y,z) = G(z,y) = G(y,-z) = G(-y,z)`` hold bitwise.

    Each step averages two operands, which commutes exactly, and later steps
    keep the earlier symmetries; the coefficient symmetries then hold exactly.
    """
    ya, za = tuple(range(d)), tuple(range(d, 2 * d))
    G = 0.5 * (G + np.flip(G, axis=ya + za))
    G = 0.5 * (G + np.transpose(G, za + ya))
    return 0.5 * (G + np.flip(G, axis=za))


def evaluate_G(kernel, y: np.ndarray, z) -> np.ndarray:
    """``G(y, z)`` by direct Fourier summation at arbitrary velocities.

    ``y`` is an array of shape ``(..., d)``; ``z`` a single velocity.  Needs a
    dense kernel, so it works up to ``N`` around 31 in 2D.
    """
    g = kernel.grid
    C = g.mode_coords().astype(np.float64)
    z = np.asarray(z, dtype=np.float64)
    w = np.pi / g.T
    B = kernel.dense()
    inner = B @ np.exp(-1j * w * (C @ z))  # sum_j B(i,j) E_{-j}(z)
    y = np.asarray(y, dtype=np.float64)
    phase = np.exp(-1j * w * (y.reshape(-1, g.d) @ C.T))
    return (phase @ inner).real.reshape(y.shape[:-1])


@dataclass(frozen=True)
class DVMCoefficients:
    """``values[r, p, q] = A^{rs}_{pq}`` with ``s = p + q - r`` (mod N).

    Flat node indices follow the grid storage order; ``s_index`` has the same
    shape as ``values``.
    """

    grid: GridSpec
    values: np.ndarray
    s_index: np.ndarray

    def entry(self, p, q, r, s) -> float:
        """Full four-index lookup (zero off the support); arguments are integer node offsets."""
        g = self.grid
        lhs = symmetric_mod(tuple(np.add(r, s)), g.N)
        rhs = symmetric_mod(tuple(np.add(p, q)), g.N)
        if lhs != rhs:
            return 0.0
        flat = lambda x: int(np.ravel_multi_index(g.index_of(x), g.shape))  # noqa: E731
        return float(self.values[flat(r), flat(p), flat(q)])

    def dense(self) -> np.ndarray:
        """Materialise ``A[p, q, r, s]`` (tiny grids only)."""
        S = self.grid.size
        if S**4 > 50_000_000:
            raise MemoryError("dense DVM tensor too large")
        out = np.zeros((S, S, S, S))
        r, p, q = np.indices((S, S, S))
        out[p, q, r, self.s_index] = self.values
        return out


def _flat_sum_index(g: GridSpec) -> np.ndarray:
    """``idx[a, b]`` = flat index of node ``a + b`` (mod N); also usable for differences."""
    C = g.mode_coords()
    s = symmetric_mod(C[:, None, :] + C[None, :, :], g.N) + g.n
    return np.ravel_multi_index(tuple(np.moveaxis(s, -1, 0)), g.shape)


def build_A(G: GTable) -> DVMCoefficients:
    g = G.grid
    _guard(g)
    S = g.size
    C = g.mode_coords()
    add = _flat_sum_index(g)
    neg = np.ravel_multi_index(tuple((symmetric_mod(-C, g.N) + g.n).T), g.shape)
    # s = p + q - r
    pq = add  # (p, q) -> p + q
    s_index = add[pq[None, :, :], neg[:, None, None]]  # (r, p, q)
    Gflat = G.values.reshape(S, S)
    p = np.arange(S)[None, :, None]
    q = np.arange(S)[None, None, :]
    negs = neg[s_index]
    y = add[p, negs]  # p - s
    z = add[q, negs]  # q - s
    values = Gflat[y, z] / float(g.N) ** (2 * g.d)
    return DVMCoefficients(g, values, s_index)


def q_dvm(values: np.ndarray, A: DVMCoefficients) -> np.ndarray:
    """``Q_r = sum_{p,q,s} A^{rs}_{pq} (F_p F_q - F_r F_s)`` on the grid."""
    F = np.asarray(values, dtype=np.float64).ravel()
    if F.size != A.grid.size:
        raise ValueError("point values do not match the coefficient grid")
    gain = np.einsum("rpq,p,q->r", A.values, F, F)
    loss = F * np.einsum("rpq,rpq->r", A.values, F[A.s_index])
    return (gain - loss).reshape(A.grid.shape)


def loss_row_sums(A: DVMCoefficients) -> np.ndarray:
    """``L[r, s] = sum_{p,q} A^{rs}_{pq}``."""
    S = A.grid.size
    L = np.zeros((S, S))
    r = np.broadcast_to(np.arange(S)[:, None, None], A.values.shape)
    np.add.at(L, (r.ravel(), A.s_index.ravel()), A.values.ravel())
    return L
