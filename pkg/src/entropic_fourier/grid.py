"""Velocity grid, Fourier mode set and the discrete Fourier transform pair.

The velocity box is ``D_T = [-T, T]^d`` sampled at ``X = {h k}`` and the
Fourier modes are ``K = {k : -n <= k_i <= n}`` with ``N = 2n + 1`` points per
dimension.  Arrays indexed by ``X`` or ``K`` are stored in lexicographic order
over ``[-n, n]^d`` (the zero mode / origin sits at the centre, index ``n``).

The transform pair is::

    F_p   = sum_{k in K} Fhat_k E_k(p)
    Fhat_k = N^{-d} sum_{p in X} F_p E_{-k}(p),      E_k(v) = exp(i pi k.v / T)

Even ``N`` is reduced to the odd case ``N - 1`` by dropping every mode with a
component equal to ``-N/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

__all__ = [
    "CARLEMAN_FACTOR",
    "CLASSICAL_FACTOR",
    "GridSpec",
    "HermitianError",
    "SpectralState",
    "default_T",
    "forward_dft",
    "inverse_dft",
    "reduce_even_N",
    "symmetric_mod",
]

# Dealiasing lower bounds T >= factor * R.
CARLEMAN_FACTOR = (3.0 * math.sqrt(2.0) + 1.0) / 4.0
CLASSICAL_FACTOR = (3.0 + math.sqrt(2.0)) / 4.0

HERMITIAN_RTOL = 1e-12


class HermitianError(ValueError):
    """Raised when mode data that should describe real point values does not."""


def _ceil2(x: float) -> float:
    # Guard against 7.8600000001 -> 7.87 style round-off before ceiling.
    return math.ceil(round(x * 100.0, 9)) / 100.0


def default_T(R: float, form: str = "carleman") -> float:
    """Smallest box half-width (rounded up to 2 decimals) meeting the dealiasing bound."""
    if form == "carleman":
        return _ceil2(CARLEMAN_FACTOR * R)
    if form == "classical":
        return _ceil2(CLASSICAL_FACTOR * R)
    raise ValueError(f"unknown kernel form {form!r}")


@dataclass(frozen=True)
class GridSpec:
    """Uniform velocity grid and matching Fourier mode set.

    Parameters
    ----------
    d : int
        Velocity dimension, 2 or 3.
    N : int
        Requested modes per dimension.  An even value is reduced to ``N - 1``;
        the requested value is kept in ``N_input``.
    R : float
        Truncation radius of the collision integral.
    T : float, optional
        Half-width of the periodic box.  Defaults to the dealiasing bound for
        ``form`` rounded up to two decimals.
    form : {"carleman", "classical"}
        Kernel representation; selects the dealiasing bound.
    allow_aliasing : bool
        Accept a ``T`` below the dealiasing bound.
    """

    d: int
    N: int
    R: float = 6.0
    T: float | None = None
    form: str = "carleman"
    allow_aliasing: bool = False
    N_input: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.d}")
        if int(self.N) != self.N or self.N < 3:
            raise ValueError(f"N must be an integer >= 3, got {self.N}")
        if self.R <= 0:
            raise ValueError("R must be positive")
        if self.form not in ("carleman", "classical"):
            raise ValueError(f"unknown kernel form {self.form!r}")
        N_in = int(self.N)
        N_odd = N_in if N_in % 2 else N_in - 1
        object.__setattr__(self, "N_input", N_in)
        object.__setattr__(self, "N", N_odd)
        T = default_T(self.R, self.form) if self.T is None else float(self.T)
        if T <= 0:
            raise ValueError("T must be positive")
        object.__setattr__(self, "T", T)
        factor = CARLEMAN_FACTOR if self.form == "carleman" else CLASSICAL_FACTOR
        if T < factor * self.R * (1 - 1e-12) and not self.allow_aliasing:
            raise ValueError(
                f"T={T} violates the {self.form} dealiasing bound "
                f"T >= {factor * self.R:.6f}; pass allow_aliasing=True to override"
            )

    @property
    def n(self) -> int:
        return (self.N - 1) // 2

    @property
    def h(self) -> float:
        """Grid spacing; the N odd nodes tile one period 2T exactly."""
        return 2.0 * self.T / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def size(self) -> int:
        return self.N**self.d

    @property
    def k1d(self) -> np.ndarray:
        """Integer mode (or node) indices ``-n..n`` along one axis."""
        return np.arange(-self.n, self.n + 1)

    @property
    def v1d(self) -> np.ndarray:
        """Node coordinates along one axis."""
        return self.h * self.k1d

    def mode_grid(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.k1d] * self.d), indexing="ij"))

    def velocity_grid(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.v1d] * self.d), indexing="ij"))

    def mode_coords(self) -> np.ndarray:
        """All modes as an ``(N^d, d)`` integer array in storage order."""
        return np.stack([g.ravel() for g in self.mode_grid()], axis=1)

    def node_coords(self) -> np.ndarray:
        """All velocity nodes as an ``(N^d, d)`` array in storage order."""
        return np.stack([g.ravel() for g in self.velocity_grid()], axis=1)

    def index_of(self, k) -> tuple[int, ...]:
        """Array index of mode ``k`` (components already in ``[-n, n]``)."""
        k = tuple(int(c) for c in k)
        if len(k) != self.d or any(abs(c) > self.n for c in k):
            raise IndexError(f"mode {k} outside K for n={self.n}")
        return tuple(c + self.n for c in k)


def symmetric_mod(l, N: int) -> np.ndarray | tuple[int, ...]:
    """Reduce integer components modulo ``N`` into ``[-n, n]`` (``N = 2n + 1``).

    Accepts a tuple (returns a tuple) or an integer array (returns an array).
    """
    if N % 2 == 0:
        raise ValueError("symmetric_mod requires odd N; reduce even N first")
    n = (N - 1) // 2
    if isinstance(l, tuple):
        return tuple(int((c + n) % N - n) for c in l)
    return (np.asarray(l) + n) % N - n


def _to_fft_layout(a: np.ndarray, axes) -> np.ndarray:
    return sfft.ifftshift(a, axes=axes)


def _from_fft_layout(a: np.ndarray, axes) -> np.ndarray:
    return sfft.fftshift(a, axes=axes)


@dataclass
class SpectralState:
    """Fourier coefficients on ``K`` together with the simulation time.

    ``values`` is the real point-value view on ``X``; it is cached when the
    state was built from samples so that sampled data round-trips exactly.
    """

    modes: np.ndarray
    grid: GridSpec
    time: float = 0.0
    _values: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.modes = np.asarray(self.modes, dtype=np.complex128)
        if self.modes.shape != self.grid.shape:
            raise ValueError(f"modes shape {self.modes.shape} != grid shape {self.grid.shape}")

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = inverse_dft(self)
        return self._values

    @property
    def mass_mode(self) -> complex:
        return complex(self.modes[(self.grid.n,) * self.grid.d])

    def with_modes(self, modes: np.ndarray, time: float | None = None) -> SpectralState:
        return SpectralState(modes, self.grid, self.time if time is None else time)


def forward_dft(values, grid: GridSpec, time: float = 0.0) -> SpectralState:
    """Point values on ``X`` to Fourier coefficients on ``K``."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != grid.shape:
        raise ValueError(f"values shape {values.shape} does not match grid {grid.shape}")
    axes = tuple(range(grid.d))
    modes = _from_fft_layout(sfft.fftn(_to_fft_layout(values, axes), axes=axes), axes)
    modes /= grid.size
    return SpectralState(modes, grid, time, _values=values.copy())


def _realify(field_: np.ndarray, what: str) -> np.ndarray:
    scale = np.max(np.abs(field_.real)) if field_.size else 0.0
    resid = np.max(np.abs(field_.imag)) if field_.size else 0.0
    if resid > HERMITIAN_RTOL * max(scale, np.finfo(float).tiny):
        raise HermitianError(
            f"{what}: imaginary residue {resid:.3e} exceeds {HERMITIAN_RTOL:g} x {scale:.3e}"
        )
    return np.ascontiguousarray(field_.real)


def inverse_dft(state: SpectralState) -> np.ndarray:
    """Fourier coefficients to real point values; rejects non-Hermitian data."""
    grid = state.grid
    axes = tuple(range(grid.d))
    vals = _from_fft_layout(sfft.ifftn(_to_fft_layout(state.modes, axes), axes=axes), axes)
    vals *= grid.size
    return _realify(vals, "inverse_dft")


def reduce_even_N(a: np.ndarray, axes=None) -> np.ndarray:
    """Drop the ``-N/2`` slot along each axis of an even-``N`` mode array.

    Even-``N`` arrays are taken in lexicographic order over ``-N/2 .. N/2 - 1``,
    so the dropped slot is index 0.  The result is indexed over ``[-(N/2 - 1), N/2 - 1]``.
    """
    a = np.asarray(a)
    axes = tuple(range(a.ndim)) if axes is None else tuple(axes)
    sl = [slice(None)] * a.ndim
    for ax in axes:
        if a.shape[ax] % 2:
            raise ValueError(f"axis {ax} has odd length {a.shape[ax]}; nothing to reduce")
        sl[ax] = slice(1, None)
    return a[tuple(sl)].copy()
