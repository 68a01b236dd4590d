"""Discrete collision operator in Fourier space.

For a kernel ``B*`` (possibly filtered) and an indicator ``ind``,

    Qhat_k = sum_{l, m in K} ind(l + m - k) (B*(l, m) - B*(m, m)) Fhat_l Fhat_m

The indicator is strict (``l + m = k``) for the Galerkin method and aliased
(``l + m = k`` modulo ``N``) for the collocation-type methods.  Three
evaluators share that contract:

* ``eval_collision_direct``: dense double sum, any dimension, small N.
* ``eval_collision_fast``: 2D low-rank kernels; every rank-one term is a
  convolution done by FFT, circular of length N (aliased) or zero padded
  (strict).
* ``eval_collision_3d``: 3D table kernels; compiled direct gain sum plus an FFT
  loss convolution.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from ._gain3d import gain_sums
from .filters import FilterWeights
from .grid import GridSpec, SpectralState, symmetric_mod
from .kernel import FilteredKernel, KernelFactors2D, KernelTable3D, apply_filter

__all__ = [
    "CollisionOperator",
    "Method",
    "MethodVariant",
    "eval_collision",
    "eval_collision_3d",
    "eval_collision_direct",
    "eval_collision_fast",
    "filtered_kernel_for",
    "gain_loss_split",
    "gain_term",
    "loss_term",
    "set_fft_workers",
]

_WORKERS = 1


def set_fft_workers(n: int) -> None:
    """Number of threads scipy.fft may use inside the evaluators."""
    global _WORKERS
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _WORKERS = int(n)


class MethodVariant(enum.Enum):
    FGM = "fgm"
    FCM = "fcm"
    EFM = "efm"
    EFM_FEJER = "efm-fejer"

    @property
    def aliased(self) -> bool:
        return self is not MethodVariant.FGM

    @property
    def filter_kind(self) -> str:
        return {"efm": "jackson", "efm-fejer": "fejer"}.get(self.value, "none")

    @property
    def default_init(self) -> str:
        return "projection" if self in (MethodVariant.FGM, MethodVariant.FCM) else "interpolation"

    @classmethod
    def parse(cls, name) -> MethodVariant:
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        for v in cls:
            if v.value == key:
                return v
        raise ValueError(f"unknown method {name!r}; expected one of {[v.value for v in cls]}")


INIT_MODES = ("interpolation", "projection")


@dataclass(frozen=True)
class Method:
    """A variant plus its initializer; the filter is fixed by the variant."""

    variant: MethodVariant
    init: str | None = None
    filter_kind: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", MethodVariant.parse(self.variant))
        init = self.init or self.variant.default_init
        if init not in INIT_MODES:
            raise ValueError(f"unknown initializer {init!r}; expected one of {INIT_MODES}")
        object.__setattr__(self, "init", init)
        fk = self.filter_kind or self.variant.filter_kind
        if fk != self.variant.filter_kind:
            raise ValueError(
                f"method {self.variant.value} uses the {self.variant.filter_kind!r} filter, not {fk!r}"
            )
        object.__setattr__(self, "filter_kind", fk)


def filtered_kernel_for(kernel, variant: MethodVariant) -> FilteredKernel:
    """Attach the filter a variant prescribes to a raw kernel."""
    variant = MethodVariant.parse(variant)
    return apply_filter(kernel, FilterWeights.make(variant.filter_kind, kernel.grid.n))


def _check(modes: np.ndarray, kernel: FilteredKernel) -> GridSpec:
    g = kernel.grid
    if modes.shape != g.shape:
        raise ValueError(f"state shape {modes.shape} does not match kernel grid {g.shape}")
    return g


def _modes(x) -> np.ndarray:
    return x.modes if isinstance(x, SpectralState) else np.asarray(x, dtype=np.complex128)


# ---------------------------------------------------------------- direct sum


def _target_index(g: GridSpec, aliased: bool):
    """Flat output index of ``l + m`` for every pair, and a validity mask."""
    C = g.mode_coords()
    s = C[:, None, :] + C[None, :, :]
    if aliased:
        s = symmetric_mod(s, g.N)
        valid = None
    else:
        valid = np.all(np.abs(s) <= g.n, axis=-1)
        s = np.clip(s, -g.n, g.n)
    flat = np.ravel_multi_index(tuple(np.moveaxis(s + g.n, -1, 0)), g.shape)
    return flat, valid


def _scatter(W: np.ndarray, g: GridSpec, aliased: bool) -> np.ndarray:
    flat, valid = _target_index(g, aliased)
    if valid is not None:
        W = np.where(valid, W, 0.0)
    re = np.bincount(flat.ravel(), weights=W.real.ravel(), minlength=g.size)
    im = np.bincount(flat.ravel(), weights=W.imag.ravel(), minlength=g.size)
    return (re + 1j * im).reshape(g.shape)


def _direct_parts(f, gfun, kernel: FilteredKernel, variant: MethodVariant):
    g = _check(f, kernel)
    B = kernel.dense()
    D = kernel.diagonal().ravel()
    fl = f.ravel()
    gm = gfun.ravel()
    gain = _scatter(B * np.multiply.outer(fl, gm), g, variant.aliased)
    loss = _scatter(np.multiply.outer(fl, D * gm), g, variant.aliased)
    return gain, loss


def eval_collision_direct(state, kernel: FilteredKernel, variant) -> np.ndarray:
    """Reference ``O(N^{2d})`` double sum over a materialised kernel."""
    variant = MethodVariant.parse(variant)
    f = _modes(state)
    gain, loss = _direct_parts(f, f, kernel, variant)
    return gain - loss


# ------------------------------------------------------- FFT convolutions


class _Conv:
    """Convolution of mode arrays on ``K`` through physical space.

    ``to_phys`` returns ``a(x) = sum_k a_k exp(2 pi i k.x / L)`` on ``L^d``
    points; ``from_phys`` inverts it and restricts to ``K``.  ``L = N`` gives
    the aliased sum, ``L >= 2N - 1`` the strict one.
    """

    def __init__(self, g: GridSpec, aliased: bool):
        self.g = g
        self.aliased = aliased
        self.L = g.N if aliased else sfft.next_fast_len(2 * g.N - 1)
        self.scale = float(self.L) ** g.d

    def to_phys(self, a: np.ndarray) -> np.ndarray:
        g, d = self.g, self.g.d
        axes = tuple(range(a.ndim - d, a.ndim))
        if self.aliased:
            b = sfft.ifftshift(a, axes=axes)
        else:
            b = np.zeros(a.shape[: a.ndim - d] + (self.L,) * d, dtype=np.complex128)
            b[(Ellipsis,) + (slice(0, g.N),) * d] = a
            b = np.roll(b, [-g.n] * d, axis=axes)
        return sfft.ifftn(b, axes=axes, workers=_WORKERS) * self.scale

    def from_phys(self, x: np.ndarray) -> np.ndarray:
        g, d = self.g, self.g.d
        axes = tuple(range(x.ndim - d, x.ndim))
        c = sfft.fftn(x, axes=axes, workers=_WORKERS) / self.scale
        if self.aliased:
            return sfft.fftshift(c, axes=axes)
        c = np.roll(c, [g.n] * d, axis=axes)
        return c[(Ellipsis,) + (slice(0, g.N),) * d]


def _fast_parts(f, gfun, kernel: FilteredKernel, variant: MethodVariant):
    if not kernel.factored:
        raise TypeError("fast evaluation needs a low-rank (factored) 2D kernel")
    g = _check(f, kernel)
    conv = _Conv(g, variant.aliased)
    w = kernel.weights
    pb = conv.to_phys(kernel.beta * f)
    pg = conv.to_phys(kernel.gamma * gfun)
    gain = conv.from_phys(np.tensordot(w, pb * pg, axes=1))
    loss = _loss_conv(f, gfun, kernel, conv)
    return gain, loss


def _loss_conv(f, gfun, kernel: FilteredKernel, conv: _Conv) -> np.ndarray:
    D = kernel.diagonal()
    return conv.from_phys(conv.to_phys(f) * conv.to_phys(D * gfun))


def eval_collision_fast(state, kernel: FilteredKernel, variant) -> np.ndarray:
    """FFT evaluation for a factored 2D kernel."""
    variant = MethodVariant.parse(variant)
    f = _modes(state)
    gain, loss = _fast_parts(f, f, kernel, variant)
    return gain - loss


# ------------------------------------------------------------------ 3D table


def _fold(C: np.ndarray, g: GridSpec, aliased: bool) -> np.ndarray:
    """Map unreduced sums ``u in [-2n, 2n]^d`` onto ``K``."""
    n, N = g.n, g.N
    if not aliased:
        return C[(slice(n, n + N),) * g.d].copy()
    u = np.arange(-2 * n, 2 * n + 1)
    target = symmetric_mod(u, N) + n
    out = C
    for ax in range(g.d):
        moved = np.moveaxis(out, ax, 0)
        acc = np.zeros((N,) + moved.shape[1:], dtype=np.complex128)
        np.add.at(acc, target, moved)
        out = np.moveaxis(acc, 0, ax)
    return out


def _gain_3d(f: np.ndarray, kernel: FilteredKernel, variant: MethodVariant) -> np.ndarray:
    C = gain_sums(kernel.sigma * f, kernel.base.phi)
    return _fold(C, kernel.grid, variant.aliased)


def eval_collision_3d(state, kernel: FilteredKernel, variant) -> np.ndarray:
    """3D table kernel: compiled gain sum plus FFT loss convolution.

    The compiled gain assumes Hermitian data (real point values).
    """
    variant = MethodVariant.parse(variant)
    if not isinstance(kernel.base, KernelTable3D):
        raise TypeError("eval_collision_3d needs a 3D table kernel")
    f = _modes(state)
    g = _check(f, kernel)
    gain = _gain_3d(f, kernel, variant)
    loss = _loss_conv(f, f, kernel, _Conv(g, variant.aliased))
    return gain - loss


# ---------------------------------------------------------------- dispatch


def _parts(f, gfun, kernel: FilteredKernel, variant: MethodVariant, path: str):
    if path == "auto":
        if kernel.factored:
            path = "fast"
        elif isinstance(kernel.base, KernelTable3D) and f is gfun:
            path = "3d"
        else:
            path = "direct"
    if path == "fast":
        return _fast_parts(f, gfun, kernel, variant)
    if path == "3d":
        g = _check(f, kernel)
        gain = _gain_3d(f, kernel, variant)
        return gain, _loss_conv(f, f, kernel, _Conv(g, variant.aliased))
    if path == "direct":
        return _direct_parts(f, gfun, kernel, variant)
    raise ValueError(f"unknown evaluation path {path!r}")


def gain_term(f, g, kernel: FilteredKernel, variant, path: str = "auto") -> np.ndarray:
    """Bilinear gain ``sum ind(l+m-k) B*(l,m) f_l g_m``."""
    variant = MethodVariant.parse(variant)
    f, g = _modes(f), _modes(g)
    if path == "3d" or (path == "auto" and not kernel.factored):
        path = "direct" if f is not g else path
    return _parts(f, g, kernel, variant, path)[0]


def loss_term(f, g, kernel: FilteredKernel, variant, path: str = "auto") -> np.ndarray:
    """Bilinear loss ``sum ind(l+m-k) B*(m,m) f_l g_m``."""
    variant = MethodVariant.parse(variant)
    f, g = _modes(f), _modes(g)
    conv = _Conv(kernel.grid, variant.aliased)
    _check(f, kernel)
    if path == "direct":
        return _direct_parts(f, g, kernel, variant)[1]
    return _loss_conv(f, g, kernel, conv)


def gain_loss_split(state, kernel: FilteredKernel, variant, path: str = "auto"):
    """``(Qhat_plus, Qhat_minus)`` with ``Qhat = Qhat_plus - Qhat_minus``."""
    variant = MethodVariant.parse(variant)
    f = _modes(state)
    return _parts(f, f, kernel, variant, path)


def eval_collision(state, kernel: FilteredKernel, variant, path: str = "auto") -> np.ndarray:
    gain, loss = gain_loss_split(state, kernel, variant, path)
    return gain - loss


class CollisionOperator:
    """Right-hand side ``Fhat -> Qhat[Fhat]`` for the time stepper."""

    def __init__(self, kernel: FilteredKernel, variant, path: str = "auto"):
        self.kernel = kernel
        self.variant = MethodVariant.parse(variant)
        if self.variant.filter_kind != kernel.filter.kind:
            raise ValueError(
                f"{self.variant.value} expects a {self.variant.filter_kind!r} kernel, got {kernel.filter.kind!r}"
            )
        self.path = path
        self.evaluations = 0

    @classmethod
    def build(cls, kernel, variant, path: str = "auto") -> CollisionOperator:
        variant = MethodVariant.parse(variant)
        if isinstance(kernel, (KernelFactors2D, KernelTable3D)):
            kernel = filtered_kernel_for(kernel, variant)
        return cls(kernel, variant, path)

    @property
    def grid(self) -> GridSpec:
        return self.kernel.grid

    def __call__(self, modes: np.ndarray) -> np.ndarray:
        self.evaluations += 1
        return eval_collision(modes, self.kernel, self.variant, self.path)
