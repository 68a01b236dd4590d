"""Compiled inner loop of the 3D gain sum.

Computes, for every unreduced sum ``u = l + m`` (``u`` in ``[-2n, 2n]^3``),

    C(u) = sum_{l + m = u; l, m in K} Phi[|u|^2, |l - m|^2] f_l f_m

using ``C(-u) = conj(C(u))`` (``f`` Hermitian) and the ``l <-> m`` symmetry of
each term, so only a quarter of the ``N^6`` products are formed.  The
summation order is fixed, hence results are reproducible bit for bit.
"""

import numba
import numpy as np


@numba.njit(cache=True, fastmath=False)
def _gain_sums(fr, fi, phi, n):  # pragma: no cover - compiled
    N = 2 * n + 1
    M = 4 * n + 1
    gr = np.empty_like(fr)
    gi = np.empty_like(fi)
    # reversed copy along the last axis keeps the inner loop contiguous
    for a in range(N * N):
        for j in range(N):
            gr[a * N + j] = fr[a * N + N - 1 - j]
            gi[a * N + j] = fi[a * N + N - 1 - j]
    P = phi.shape[1]
    phif = phi.ravel()
    Cr = np.zeros(M * M * M)
    Ci = np.zeros(M * M * M)
    for u1 in range(0, 2 * n + 1):
        for u2 in range(-2 * n, 2 * n + 1):
            if u1 == 0 and u2 < 0:
                continue
            for u3 in range(-2 * n, 2 * n + 1):
                if u1 == 0 and u2 == 0 and u3 < 0:
                    continue
                rowbase = (u1 * u1 + u2 * u2 + u3 * u3) * P
                lo1 = max(-n, u1 - n)
                hi1 = min(n, u1 + n)
                lo2 = max(-n, u2 - n)
                hi2 = min(n, u2 + n)
                lo3 = max(-n, u3 - n)
                hi3 = min(n, u3 + n)
                ar = 0.0
                ai = 0.0
                for l1 in range(lo1, hi1 + 1):
                    if 2 * l1 > u1:
                        break
                    w1 = 2 * l1 - u1
                    for l2 in range(lo2, hi2 + 1):
                        if 2 * l1 == u1 and 2 * l2 > u2:
                            break
                        centre = (2 * l1 == u1) and (2 * l2 == u2)
                        w2 = 2 * l2 - u2
                        rb = rowbase + w1 * w1 + w2 * w2
                        xb = ((l1 + n) * N + (l2 + n)) * N + n
                        yb = ((u1 - l1 + n) * N + (u2 - l2 + n)) * N + n - u3
                        top = hi3
                        if centre:
                            top = min(hi3, (u3 - 1) // 2)
                        sr = 0.0
                        si = 0.0
                        for l3 in range(lo3, top + 1):
                            w3 = 2 * l3 - u3
                            p = phif[rb + w3 * w3]
                            xr = fr[xb + l3]
                            xi = fi[xb + l3]
                            yr = gr[yb + l3]
                            yi = gi[yb + l3]
                            sr += p * (xr * yr - xi * yi)
                            si += p * (xr * yi + xi * yr)
                        ar += 2.0 * sr
                        ai += 2.0 * si
                        if centre and u3 % 2 == 0:
                            l3 = u3 // 2
                            p = phif[rb]
                            xr = fr[xb + l3]
                            xi = fi[xb + l3]
                            yr = gr[yb + l3]
                            yi = gi[yb + l3]
                            ar += p * (xr * yr - xi * yi)
                            ai += p * (xr * yi + xi * yr)
                idx = ((u1 + 2 * n) * M + (u2 + 2 * n)) * M + u3 + 2 * n
                jdx = ((-u1 + 2 * n) * M + (-u2 + 2 * n)) * M - u3 + 2 * n
                Cr[idx] = ar
                Ci[idx] = ai
                Cr[jdx] = ar
                Ci[jdx] = -ai
    return Cr, Ci


def gain_sums(f: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Unreduced gain sums ``C(u)`` as a complex ``(4n+1)^3`` array.

    ``f`` must be Hermitian (``f_{-k} = conj(f_k)``), shape ``(N, N, N)``.
    """
    N = f.shape[0]
    n = (N - 1) // 2
    fr = np.ascontiguousarray(f.real).ravel()
    fi = np.ascontiguousarray(f.imag).ravel()
    Cr, Ci = _gain_sums(fr, fi, np.ascontiguousarray(phi), n)
    M = 4 * n + 1
    return (Cr + 1j * Ci).reshape(M, M, M)
