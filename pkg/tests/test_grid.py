import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from entropic_fourier.grid import (
    CARLEMAN_FACTOR,
    CLASSICAL_FACTOR,
    GridSpec,
    HermitianError,
    SpectralState,
    default_T,
    forward_dft,
    inverse_dft,
    reduce_even_N,
    symmetric_mod,
)


def test_default_T_values():
    assert default_T(6.0, "carleman") == 7.87
    assert default_T(6.0, "classical") == 6.63
    assert default_T(6.0) >= CARLEMAN_FACTOR * 6.0
    assert default_T(6.0, "classical") >= CLASSICAL_FACTOR * 6.0


def test_grid_defaults_and_spacing():
    g = GridSpec(2, 33)
    assert g.T == 7.87 and g.n == 16 and g.shape == (33, 33)
    assert g.h == pytest.approx(2 * 7.87 / 33)
    assert g.v1d[g.n] == 0.0


def test_dealiasing_bound_enforced():
    with pytest.raises(ValueError, match="dealiasing"):
        GridSpec(2, 9, R=6.0, T=7.0)
    g = GridSpec(2, 9, R=6.0, T=7.0, allow_aliasing=True)
    assert g.T == 7.0
    GridSpec(3, 9, R=6.0, T=6.63, form="classical")
    with pytest.raises(ValueError):
        GridSpec(3, 9, R=6.0, T=6.63, form="carleman")


@pytest.mark.parametrize(
    "kwargs",
    [dict(d=1, N=9), dict(d=4, N=9), dict(d=2, N=2), dict(d=2, N=9, R=-1.0), dict(d=2, N=9, form="hard")],
)
def test_invalid_grids(kwargs):
    with pytest.raises(ValueError):
        GridSpec(**kwargs)


def test_even_N_reduction():
    g = GridSpec(2, 16)
    assert g.N == 15 and g.N_input == 16 and g.size == 225
    assert GridSpec(3, 32, form="classical").shape == (31, 31, 31)


def test_reduce_even_N_drops_lowest_slot():
    a = np.arange(16).reshape(4, 4)
    b = reduce_even_N(a)
    assert b.shape == (3, 3)
    np.testing.assert_array_equal(b, a[1:, 1:])
    with pytest.raises(ValueError):
        reduce_even_N(np.zeros((5, 5)))


def test_symmetric_mod():
    assert symmetric_mod((5, -5, 0, 2), 5) == (0, 0, 0, 2)
    assert symmetric_mod((3, -3), 5) == (-2, 2)
    np.testing.assert_array_equal(symmetric_mod(np.array([-4, -3, 3, 4, 7]), 7), [3, -3, 3, -3, 0])
    with pytest.raises(ValueError):
        symmetric_mod((1,), 4)


@given(st.lists(st.integers(-1000, 1000), min_size=1, max_size=4), st.integers(1, 20))
def test_symmetric_mod_range_and_congruence(l, n):
    N = 2 * n + 1
    r = symmetric_mod(tuple(l), N)
    assert all(-n <= c <= n for c in r)
    assert all((a - b) % N == 0 for a, b in zip(l, r))


def test_index_of():
    g = GridSpec(2, 5)
    assert g.index_of((0, 0)) == (2, 2)
    assert g.index_of((-2, 1)) == (0, 3)
    with pytest.raises(IndexError):
        g.index_of((3, 0))


def _naive_forward(F, g):
    X = g.node_coords()
    K = g.mode_coords()
    E = np.exp(-1j * math.pi * (K @ X.T) / g.T)
    return (E @ F.ravel()).reshape(g.shape) / g.size


def test_forward_matches_definition(rng):
    for d, N in ((2, 5), (2, 6), (3, 5)):
        g = GridSpec(d, N, form="classical")
        F = rng.random(g.shape)
        np.testing.assert_allclose(forward_dft(F, g).modes, _naive_forward(F, g), atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (7, 7), elements=st.floats(-10, 10)))
def test_roundtrip_and_hermitian(F):
    g = GridSpec(2, 7)
    s = forward_dft(F, g)
    m = s.modes
    np.testing.assert_allclose(m, np.conj(m[::-1, ::-1]), atol=1e-13)
    back = inverse_dft(SpectralState(m, g))
    np.testing.assert_allclose(back, F, atol=1e-12 * max(1.0, np.abs(F).max()))


def test_sampled_state_keeps_exact_values(rng):
    g = GridSpec(2, 9)
    F = rng.random(g.shape)
    s = forward_dft(F, g)
    np.testing.assert_array_equal(s.values, F)
    assert s.mass_mode == pytest.approx(F.mean())


def test_non_hermitian_rejected():
    g = GridSpec(2, 5)
    m = np.zeros(g.shape, complex)
    m[2, 3] = 1.0  # no conjugate partner
    with pytest.raises(HermitianError):
        inverse_dft(SpectralState(m, g))


def test_state_shape_checked():
    with pytest.raises(ValueError):
        SpectralState(np.zeros((4, 4)), GridSpec(2, 5))
    with pytest.raises(ValueError):
        forward_dft(np.zeros((4, 4)), GridSpec(2, 5))
