import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropic_fourier.collision import (
    CollisionOperator,
    Method,
    MethodVariant,
    eval_collision,
    eval_collision_3d,
    eval_collision_direct,
    eval_collision_fast,
    filtered_kernel_for,
    gain_loss_split,
    gain_term,
    loss_term,
)
from entropic_fourier.filters import FilterWeights
from entropic_fourier.grid import SpectralState, forward_dft, inverse_dft
from entropic_fourier.kernel import apply_filter

from _support import grid_for, kernel_for

VARIANTS = list(MethodVariant)


def random_state(d, N, rng, positive=False):
    g = grid_for(d, N)
    F = rng.random(g.shape) if positive else rng.standard_normal(g.shape)
    return forward_dft(F, g)


def test_variant_properties():
    assert MethodVariant.parse("EFM") is MethodVariant.EFM
    assert MethodVariant.parse(MethodVariant.FGM) is MethodVariant.FGM
    assert not MethodVariant.FGM.aliased and MethodVariant.FCM.aliased
    assert MethodVariant.EFM.filter_kind == "jackson"
    assert MethodVariant.EFM_FEJER.filter_kind == "fejer"
    assert MethodVariant.FGM.default_init == "projection"
    assert MethodVariant.EFM.default_init == "interpolation"
    with pytest.raises(ValueError):
        MethodVariant.parse("ppsm")


def test_method_consistency():
    m = Method(MethodVariant.EFM)
    assert (m.init, m.filter_kind) == ("interpolation", "jackson")
    assert Method(MethodVariant.FCM, init="projection").init == "projection"
    with pytest.raises(ValueError):
        Method(MethodVariant.EFM, filter_kind="none")
    with pytest.raises(ValueError):
        Method(MethodVariant.FGM, init="sampling")


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("d,N", [(2, 9), (3, 5)])
def test_zero_mode_only_state_is_stationary(variant, d, N):
    g = grid_for(d, N)
    m = np.zeros(g.shape, complex)
    m[(g.n,) * d] = 0.7
    Q = eval_collision(SpectralState(m, g), filtered_kernel_for(kernel_for(d, N), variant), variant)
    assert np.abs(Q).max() <= 1e-13


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("d,N", [(2, 5), (2, 9), (2, 17), (3, 5)])
def test_fast_matches_direct_and_conserves_mass(variant, d, N, rng):
    fk = filtered_kernel_for(kernel_for(d, N), variant)
    for _ in range(3):
        s = random_state(d, N, rng)
        ref = eval_collision_direct(s, fk, variant)
        fast = eval_collision_fast(s, fk, variant) if d == 2 else eval_collision_3d(s, fk, variant)
        scale = np.abs(ref).max()
        assert np.abs(fast - ref).max() <= 1e-10 * scale
        c = (s.grid.n,) * d
        assert abs(fast[c]) <= 1e-12 * scale
        assert abs(ref[c]) <= 1e-12 * scale


@pytest.mark.parametrize("variant", VARIANTS)
def test_result_is_hermitian(variant, rng):
    s = random_state(2, 9, rng)
    Q = eval_collision(s, filtered_kernel_for(kernel_for(2, 9), variant), variant)
    out = inverse_dft(SpectralState(Q, s.grid))
    assert np.isrealobj(out)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(VARIANTS))
def test_mass_mode_vanishes_property(seed, variant):
    s = random_state(2, 9, np.random.default_rng(seed))
    Q = eval_collision(s, filtered_kernel_for(kernel_for(2, 9), variant), variant)
    assert abs(Q[4, 4]) <= 1e-12 * max(np.abs(Q).max(), 1e-300)


def test_uniform_point_values_stationary():
    for d, N in ((2, 9), (3, 5)):
        g = grid_for(d, N)
        s = forward_dft(np.full(g.shape, 0.3), g)
        for v in VARIANTS:
            Q = eval_collision(s, filtered_kernel_for(kernel_for(d, N), v), v)
            assert np.abs(Q).max() <= 1e-13


@pytest.mark.parametrize("variant", VARIANTS)
def test_split_consistent(variant, rng):
    s = random_state(2, 9, rng)
    fk = filtered_kernel_for(kernel_for(2, 9), variant)
    gain, loss = gain_loss_split(s, fk, variant)
    np.testing.assert_allclose(gain - loss, eval_collision_direct(s, fk, variant), atol=1e-12 * np.abs(gain).max())


@pytest.mark.parametrize("d,N", [(2, 9), (3, 5)])
def test_filtered_identities(d, N, rng):
    # filtered gain equals unfiltered gain on filtered modes; loss carries sigma^2 on the second argument
    raw = kernel_for(d, N)
    g = grid_for(d, N)
    jk = apply_filter(raw, FilterWeights.make("jackson", g.n))
    nk = apply_filter(raw, FilterWeights.make("none", g.n))
    sig = jk.sigma
    f = random_state(d, N, rng).modes
    for v in (MethodVariant.FCM, MethodVariant.FGM):
        lhs = gain_term(f, f, jk, v)
        rhs = gain_term(sig * f, sig * f, nk, v)
        assert np.abs(lhs - rhs).max() <= 1e-12 * np.abs(rhs).max()
        lhs = loss_term(f, f, jk, v)
        rhs = loss_term(f, sig**2 * f, nk, v)
        assert np.abs(lhs - rhs).max() <= 1e-12 * np.abs(rhs).max()


def test_bilinear_terms_match_direct(rng):
    fk = filtered_kernel_for(kernel_for(2, 9), "efm")
    f = random_state(2, 9, rng).modes
    h = random_state(2, 9, rng).modes
    for v in VARIANTS:
        for term in (gain_term, loss_term):
            a = term(f, h, fk, v)
            b = term(f, h, fk, v, path="direct")
            assert np.abs(a - b).max() <= 1e-11 * np.abs(b).max()


def _naive_3d(f, B, g, aliased):
    C = g.mode_coords()
    D = np.diag(B)
    out = np.zeros(g.size, complex)
    fl = f.ravel()
    for i, l in enumerate(C):
        for j, m in enumerate(C):
            k = l + m
            if aliased:
                k = (k + g.n) % g.N - g.n
            elif np.any(np.abs(k) > g.n):
                continue
            t = int(np.ravel_multi_index(tuple(k + g.n), g.shape))
            out[t] += (B[i, j] - D[j]) * fl[i] * fl[j]
    return out.reshape(g.shape)


@pytest.mark.parametrize("variant", VARIANTS)
def test_3d_matches_naive_loop(variant, rng):
    fk = filtered_kernel_for(kernel_for(3, 5), variant)
    s = random_state(3, 5, rng)
    ref = _naive_3d(s.modes, fk.dense(), s.grid, variant.aliased)
    Q = eval_collision_3d(s, fk, variant)
    assert np.abs(Q - ref).max() <= 1e-12 * np.abs(ref).max()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_efm_increment_nonnegative_at_zero_node(seed):
    rng = np.random.default_rng(seed)
    g = grid_for(2, 9)
    F = rng.random(g.shape)
    idx = tuple(rng.integers(0, 9, size=2))
    F[idx] = 0.0
    fk = filtered_kernel_for(kernel_for(2, 9), "efm")
    Q = inverse_dft(SpectralState(eval_collision(forward_dft(F, g), fk, "efm"), g))
    assert Q[idx] >= -1e-12 * np.abs(Q).max()


def test_operator_counts_and_validates(rng):
    raw = kernel_for(2, 9)
    op = CollisionOperator.build(raw, "efm")
    s = random_state(2, 9, rng)
    op(s.modes)
    op(s.modes)
    assert op.evaluations == 2 and op.grid.N == 9
    with pytest.raises(ValueError):
        CollisionOperator(filtered_kernel_for(raw, "fcm"), "efm")


def test_errors(rng):
    fk9 = filtered_kernel_for(kernel_for(2, 9), "efm")
    with pytest.raises(ValueError):
        eval_collision(random_state(2, 5, rng), fk9, "efm")
    with pytest.raises(ValueError):
        eval_collision(random_state(2, 9, rng), fk9, "efm", path="magic")
    fk3 = filtered_kernel_for(kernel_for(3, 5), "efm")
    with pytest.raises(TypeError):
        eval_collision_fast(random_state(3, 5, rng), fk3, "efm")
    with pytest.raises(TypeError):
        eval_collision_3d(random_state(2, 9, rng), fk9, "efm")
