"""Entropic Fourier method and comparison spectral solvers for the
space-homogeneous Boltzmann equation with Maxwell molecules.

Typical use::

    from entropic_fourier import solve
    result = solve("bkw2d", "efm", N=64, t_end=1.0)
    result.errors, result.records[-1].entropy
"""

__version__ = "0.1.0"

from .collision import (  # noqa: E402
    CollisionOperator,
    Method,
    MethodVariant,
    eval_collision,
    eval_collision_3d,
    eval_collision_direct,
    eval_collision_fast,
    gain_loss_split,
)
from .diagnostics import DiagnosticsRecord, entropy, lp_relative_error, positivity_error  # noqa: E402
from .filters import FilterWeights, certify_kernel_nonnegative, fejer_1d, jackson_1d  # noqa: E402
from .grid import GridSpec, SpectralState, forward_dft, inverse_dft  # noqa: E402
from .kernel import KernelSpec, apply_filter, build_kernel  # noqa: E402
from .problems import ProblemSpec, initialize  # noqa: E402
from .solver import RunResult, Simulation, solve  # noqa: E402
from .timestepper import TimeSpec, integrate, ssprk3_step  # noqa: E402

__all__ = [
    "CollisionOperator",
    "DiagnosticsRecord",
    "FilterWeights",
    "GridSpec",
    "KernelSpec",
    "Method",
    "MethodVariant",
    "ProblemSpec",
    "RunResult",
    "Simulation",
    "SpectralState",
    "TimeSpec",
    "apply_filter",
    "build_kernel",
    "certify_kernel_nonnegative",
    "entropy",
    "eval_collision",
    "eval_collision_3d",
    "eval_collision_direct",
    "eval_collision_fast",
    "fejer_1d",
    "forward_dft",
    "gain_loss_split",
    "initialize",
    "integrate",
    "inverse_dft",
    "jackson_1d",
    "lp_relative_error",
    "positivity_error",
    "solve",
    "ssprk3_step",
]
