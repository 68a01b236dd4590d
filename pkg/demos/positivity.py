"""Who stays non-negative?

A bi-Gaussian initial datum has thin tails between and outside two bumps.
Galerkin-type spectral solvers (FGM, FCM) develop small negative values
there within a few steps. EFM smooths the kernel with a Jackson filter whose
physical-space kernel is non-negative, so its point values stay >= 0.
"""

from entropic_fourier import solve

N = 32
print(f"bi-Gaussian, N = {N}, t = 1")
print(f"{'method':>10} {'init':>14} {'max positivity error':>22} {'worst negative count':>22}")
for method, init in (("fgm", "projection"), ("fgm", "interpolation"),
                     ("fcm", "projection"), ("fcm", "interpolation"),
                     ("efm", "interpolation")):
    recs = solve("bigaussian2d", method, N, t_end=1.0, init=init).records
    worst = max(r.positivity_error for r in recs)
    count = max(r.negative_count for r in recs)
    print(f"{method:>10} {init:>14} {worst:22.3e} {count:22d}")
