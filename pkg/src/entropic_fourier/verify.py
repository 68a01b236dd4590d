"""Small-N self-checks of the structural properties, with fault injection.

Each check returns a :class:`Check` holding the measured value and the bound
it was held to.  ``tamper="negate-mode"`` flips the sign of one off-diagonal
kernel entry before the kernel-level checks, which must then fail.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .collision import (
    MethodVariant,
    eval_collision,
    eval_collision_direct,
    filtered_kernel_for,
    gain_term,
    loss_term,
)
from .dvm import build_A, build_G, evaluate_G, q_dvm
from .filters import FilterWeights, certify_kernel_nonnegative
from .grid import GridSpec, forward_dft, inverse_dft
from .kernel import FilteredKernel, KernelSpec, apply_filter, build_kernel

__all__ = ["Check", "report", "run_verification", "verify"]


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    bound: float
    detail: str = ""


class _Tampered:
    """A filtered kernel whose dense matrix has one entry negated."""

    def __init__(self, inner: FilteredKernel):
        self.inner = inner
        self.filter = inner.filter
        self.grid = inner.grid

    def dense(self):
        B = self.inner.dense().copy()
        c = B.shape[0] // 2  # zero mode
        i, j = c + 1, c + self.grid.N  # two low modes, untouched by filter zeros
        B[i, j] = -B[i, j]
        return B

    def diagonal(self):
        return self.inner.diagonal()


def _grid(d: int, N: int) -> GridSpec:
    return GridSpec(d, N, form="carleman" if d == 2 else "classical")


def _kernel(d: int, N: int, kind: str, M: int = 32, tamper: str | None = None):
    g = _grid(d, N)
    k = apply_filter(build_kernel(KernelSpec.for_grid(g, M=M)), FilterWeights.make(kind, g.n))
    return _Tampered(k) if tamper else k


def _rel(a, b) -> float:
    return float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))


def _symmetry(kernel) -> float:
    g = kernel.grid
    B = kernel.dense()
    neg = np.arange(g.size)[::-1]  # storage index of -l
    scale = np.abs(B).max()
    return float(max(np.abs(B - B.T).max(), np.abs(B - B[neg, :]).max()) / scale)


def run_verification(seed: int = 0, tamper: str | None = None, quick: bool = False) -> list[Check]:
    rng = np.random.default_rng(seed)
    out: list[Check] = []

    def add(name, value, bound, passed=None, detail=""):
        ok = (value <= bound) if passed is None else passed
        out.append(Check(name, bool(ok), float(value), float(bound), detail))

    # filters
    for kind in ("jackson", "fejer"):
        cert = certify_kernel_nonnegative(FilterWeights.make(kind, 16), oversample=8)
        add(f"filter_kernel_nonnegative[{kind}]", -cert.min_value, 1e-12, detail=f"min={cert.min_value:.3e}")
    cert = certify_kernel_nonnegative(FilterWeights.make("none", 16), oversample=8)
    add("dirichlet_kernel_negative", cert.min_value, 0.0, passed=cert.min_value < 0)

    # kernel symmetry
    for d, N in ((2, 9), (3, 5)):
        for kind in ("none", "jackson"):
            k = _kernel(d, N, kind, tamper=tamper)
            add(f"kernel_symmetry[{d}D,N={N},{kind}]", _symmetry(k), 1e-12)

    # G sign structure
    cases = [(2, 5), (2, 7), (2, 9), (3, 5)] if not quick else [(2, 5), (3, 5)]
    for d, N in cases:
        for kind in ("jackson", "fejer"):
            k = _kernel(d, N, kind, tamper=tamper)
            try:
                gmin = build_G(k).min
            except ValueError as exc:
                add(f"G_nonnegative[{d}D,N={N},{kind}]", np.inf, 1e-12, passed=False, detail=str(exc))
                continue
            add(f"G_nonnegative[{d}D,N={N},{kind}]", -gmin, 1e-12, detail=f"min={gmin:.3e}")
    gmin = build_G(_kernel(2, 9, "none")).min
    add("G_unfiltered_negative[2D,N=9]", gmin, 0.0, passed=gmin < 0)
    g32 = _grid(2, 32)
    k32 = apply_filter(build_kernel(KernelSpec.for_grid(g32, M=32)), FilterWeights.make("none", g32.n))
    ys = np.stack(np.meshgrid(g32.v1d, g32.v1d, indexing="ij"), axis=-1)
    slice_min = float(evaluate_G(k32, ys, (g32.T / 2, g32.T / 2)).min())
    add("G_unfiltered_negative_slice[2D,N=32]", slice_min, 0.0, passed=slice_min < 0)

    # fast / direct / 3D agreement and mass
    sizes = ((2, 5), (2, 9), (2, 17), (3, 5)) if not quick else ((2, 5), (3, 5))
    for d, N in sizes:
        g = _grid(d, N)
        base = build_kernel(KernelSpec.for_grid(g, M=32))
        for v in MethodVariant:
            fk = filtered_kernel_for(base, v)
            st = forward_dft(rng.random(g.shape), g)
            ref = eval_collision_direct(st, fk, v)
            fast = eval_collision(st, fk, v)
            add(f"fast_vs_direct[{d}D,N={N},{v.value}]", _rel(fast, ref), 1e-10)
            mass = abs(fast[(g.n,) * d]) / np.abs(fast).max()
            add(f"mass_mode_zero[{d}D,N={N},{v.value}]", mass, 1e-12)

    # filtered / unfiltered identities
    g = _grid(2, 9)
    base = build_kernel(KernelSpec.for_grid(g, M=32))
    fk = filtered_kernel_for(base, MethodVariant.EFM)
    plain = filtered_kernel_for(base, MethodVariant.FCM)
    st = forward_dft(rng.random(g.shape), g)
    sig = fk.sigma
    f = st.modes
    add("gain_identity[2D,N=9]", _rel(gain_term(f, f, fk, "efm"), gain_term(sig * f, sig * f, plain, "fcm")), 1e-12)
    add("loss_identity[2D,N=9]", _rel(loss_term(f, f, fk, "efm"), loss_term(f, sig * sig * f, plain, "fcm")), 1e-12)

    # DVM equivalence and entropy sign
    trials = 5 if quick else 20
    for d, N in ((2, 5), (2, 9), (3, 5)):
        g = _grid(d, N)
        for v in (MethodVariant.EFM, MethodVariant.FCM):
            fk = filtered_kernel_for(build_kernel(KernelSpec.for_grid(g, M=32)), v)
            kk = _Tampered(fk) if tamper else fk
            try:
                A = build_A(build_G(kk))
            except ValueError as exc:
                add(f"dvm_equivalence[{d}D,N={N},{v.value}]", np.inf, 1e-10, passed=False, detail=str(exc))
                continue
            worst, hworst = 0.0, -np.inf
            for _ in range(trials):
                F = rng.random(g.shape) + 0.05
                st = forward_dft(F, g)
                Qs = inverse_dft(st.with_modes(eval_collision(st, fk, v)))
                Qd = q_dvm(F, A)
                worst = max(worst, _rel(Qd, Qs))
                if v is MethodVariant.EFM:
                    hworst = max(hworst, float(np.sum(Qd * np.log(F))))
            add(f"dvm_equivalence[{d}D,N={N},{v.value}]", worst, 1e-10)
            if v is MethodVariant.EFM:
                add(f"entropy_production_sign[{d}D,N={N}]", hworst, 1e-12)
    return out


def report(checks: list[Check], seed: int, tamper: str | None, elapsed: float) -> dict:
    return {
        "seed": seed,
        "tamper": tamper,
        "passed": all(c.passed for c in checks),
        "n_checks": len(checks),
        "n_failed": sum(not c.passed for c in checks),
        "elapsed_s": elapsed,
        "checks": [asdict(c) for c in checks],
    }


def verify(seed: int = 0, tamper: str | None = None, quick: bool = False) -> dict:
    t0 = time.perf_counter()
    checks = run_verification(seed, tamper, quick)
    return report(checks, seed, tamper, time.perf_counter() - t0)
