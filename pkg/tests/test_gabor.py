import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from quadflow.acceptance import quadrature_symbol_transform, random_dissipative_form, random_window, t0_gap
from quadflow.errors import GridTooCoarse, NonSymplecticSingularSpace
from quadflow.form import QuadraticForm, builtin, hamilton_map
from quadflow.gabor.gaussians import standard_window, wigner_gaussian
from quadflow.gabor.matrix import (
    gabor_matrix,
    gabor_matrix_split,
    gabor_of_symbol,
    identity_symbol,
    kernel,
    metaplectic_envelope,
    split_kernel,
    symbol_transform,
)
from quadflow.gabor.verify import fractional_exponent, offset_grid, schur_bound, verify_decay
from quadflow.mehler import mehler_symbol

HERMITE = builtin("hermite", d=1)
MIXED = builtin("mixed", d1=1, d2=1)
G_STD = wigner_gaussian(standard_window(1), standard_window(1))


def overlap_quad(z, w):
    """<pi(z) g, pi(w) g> for the standard window by 1D quadrature."""
    g = lambda y: math.pi**-0.25 * np.exp(-(y**2) / 2)

    def integrand(y):
        a = np.exp(1j * z[1] * y) * g(y - z[0])
        b = np.exp(1j * w[1] * y) * g(y - w[0])
        return a * np.conj(b) / (2 * math.pi)

    re = quad(lambda y: integrand(y).real, -40, 40, epsabs=1e-14)[0]
    im = quad(lambda y: integrand(y).imag, -40, 40, epsabs=1e-14)[0]
    return re + 1j * im


# symbol transform ------------------------------------------------------------


def test_constant_symbol_is_fourier_transform():
    rng = np.random.default_rng(0)
    G = wigner_gaussian(random_window(rng, 1), standard_window(1))
    sym = identity_symbol(1)
    for _ in range(3):
        u, v = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
        ref = quadrature_symbol_transform(G, sym, u, v)
        assert gabor_of_symbol(G, sym, u, v) == pytest.approx(ref, rel=1e-6)


def test_hermite_symbol_transform_at_origin():
    sym = mehler_symbol(hamilton_map(HERMITE.form), 1.0)
    ref = quadrature_symbol_transform(G_STD, sym, np.zeros(2), np.zeros(2))
    assert gabor_of_symbol(G_STD, sym, np.zeros(2), np.zeros(2)) == pytest.approx(ref, rel=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_symbol_transform_random_forms(seed):
    rng = np.random.default_rng(seed)
    f = random_dissipative_form(rng, 1)
    sym = mehler_symbol(hamilton_map(f), rng.uniform(0.1, 2))
    G = wigner_gaussian(random_window(rng, 1), random_window(rng, 1))
    u, v = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
    ref = quadrature_symbol_transform(G, sym, u, v)
    assert gabor_of_symbol(G, sym, u, v) == pytest.approx(ref, rel=1e-6)


def test_symbol_transform_decays_in_v():
    sym = mehler_symbol(hamilton_map(HERMITE.form), 1.0)
    radii = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    v = np.outer(radii, [1.0, 0.0])
    vals = np.abs(gabor_of_symbol(G_STD, sym, np.zeros((5, 2)), v))
    for N in (1, 2, 3, 4):
        weighted = vals * (1 + radii) ** (2 * N)
        assert weighted[-1] < weighted[-2] < weighted[-3]
        assert weighted[-1] < 1e-3 * weighted[0]


# Gabor matrix ------------------------------------------------------------------


def test_t0_diagonal_is_unit_norm_squared():
    # pi(z) carries (2 pi)^{-d/2}, so <pi(z)g, pi(z)g> = (2 pi)^{-d}
    z = np.array([0.4, -1.0])
    assert (2 * math.pi) * abs(gabor_matrix(HERMITE, 0.0, z, z)) == pytest.approx(1.0, rel=1e-12)


def test_t0_overlap_is_gaussian():
    rng = np.random.default_rng(1)
    for z, w in rng.normal(size=(5, 2, 2)):
        K = abs(gabor_matrix(HERMITE, 0.0, z, w))
        assert 2 * math.pi * K == pytest.approx(math.exp(-np.sum((w - z) ** 2) / 4), rel=1e-12)
        assert K == pytest.approx(abs(overlap_quad(z, w)), rel=1e-9, abs=1e-15)


@pytest.mark.parametrize("t", [0.5, 1.0, 3.0])
def test_hermite_diagonal_against_ground_state(t):
    # the standard Gaussian is the ground state of x^2 + D^2 with eigenvalue 1
    K = abs(gabor_matrix(HERMITE, t, np.zeros(2), np.zeros(2)))
    assert K == pytest.approx(math.exp(-t) / (2 * math.pi), rel=1e-12)


def test_symbol_and_direct_routes_agree():
    rng = np.random.default_rng(2)
    f = random_dissipative_form(rng, 2)
    ks = kernel(f, 0.7)
    kd = kernel(f, 0.7, route="direct")
    w, z = rng.normal(size=(2, 10, 4))
    assert np.allclose(ks.magnitude(w, z), kd.magnitude(w, z), rtol=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([1, 2]))
def test_t0_identity(seed, d):
    rng = np.random.default_rng(seed)
    f = random_dissipative_form(rng, d)
    g, gamma = random_window(rng, d), random_window(rng, d)
    w, z = rng.normal(size=(2, 2 * d))
    assert t0_gap(f, w, z, g, gamma) < 1e-10


def test_envelope_bound_by_prefactor():
    for t in (0.2, 1.0, 2.5):
        sym = mehler_symbol(hamilton_map(HERMITE.form), t)
        k = kernel(HERMITE, t)
        w = np.random.default_rng(3).normal(size=(50, 2))
        # sup |V_G theta| is attained in closed form; compare |K| to prefactor * sup
        stripped = type(sym)(sym.t, 0j, sym.exponent)
        sup = symbol_transform(G_STD, stripped).abs().sup_abs()
        assert np.all(k.magnitude(w, np.zeros_like(w)) <= sym.prefactor_magnitude * sup * (1 + 1e-12))


def test_semigroup_composition():
    t, s = 0.6, 0.9
    Kt = kernel(HERMITE, t, route="direct").gaussian
    Ks = kernel(HERMITE, s, route="direct").gaussian
    Kts = kernel(HERMITE, t + s, route="direct")
    # closed form: int K_t(w, u) K_s(u, z) du over u
    joint = Kt.embed([0, 1, 2, 3], 6) * Ks.embed([2, 3, 4, 5], 6)
    composed = joint.integrate([2, 3])
    rng = np.random.default_rng(4)
    ticks = np.arange(-8, 8.001, 0.1)
    U = np.stack(np.meshgrid(ticks, ticks, indexing="ij"), axis=-1).reshape(-1, 2)
    for w, z in rng.uniform(-1.5, 1.5, size=(5, 2, 2)):
        exact = abs(Kts(w, z))
        closed = abs(composed(np.r_[w, z]))
        grid = abs(np.sum(Kt(np.c_[np.broadcast_to(w, U.shape), U]) * Ks(np.c_[U, np.broadcast_to(z, U.shape)])) * 0.01)
        assert closed == pytest.approx(exact, rel=1e-10)
        assert abs(grid - exact) <= 1e-4 * max(exact, 1e-300)


# split path ---------------------------------------------------------------------


def test_mixed_split_at_zero_is_overlap():
    rng = np.random.default_rng(5)
    for z, w in rng.normal(size=(5, 2, 4)):
        mag, _ = gabor_matrix_split(MIXED, 0.0, z, w)
        assert (2 * math.pi) ** 2 * mag == pytest.approx(math.exp(-np.sum((w - z) ** 2) / 4), rel=1e-10)


def test_mixed_split_matches_full_route():
    rng = np.random.default_rng(6)
    full = kernel(MIXED, 1.3, route="direct")
    for z, w in rng.normal(size=(5, 2, 4)):
        mag, _ = gabor_matrix_split(MIXED, 1.3, z, w)
        assert mag == pytest.approx(full.magnitude(w, z), rel=1e-9)


def test_mixed_envelope_at_origin():
    sigma = np.linalg.svd(np.array([[1.0, 2.0], [0.0, 1.0]]), compute_uv=False)[0]
    _, env = gabor_matrix_split(MIXED, 1.0, np.zeros(4), np.zeros(4), N=2)
    assert env == pytest.approx(math.exp(-1) * sigma**-0.5, rel=1e-12)


def test_split_needs_symplectic_singular_space():
    with pytest.raises(NonSymplecticSingularSpace):
        split_kernel(QuadraticForm(np.diag([0.0, -1.0])), 1.0)


def test_metaplectic_envelope_examples():
    free = np.diag([0.0, 1.0])
    sigma = 1 + math.sqrt(2)
    assert metaplectic_envelope(free, 1.0, np.zeros(2), np.zeros(2), 2) == pytest.approx(sigma**-0.5)
    z, w = np.array([0.3, 1.0]), np.array([-0.5, 0.2])
    ref = (1 + np.linalg.norm(w - z)) ** -3
    assert metaplectic_envelope(free, 0.0, z, w, 3) == pytest.approx(ref)
    for t in (0.4, 1.0, 2.2):
        assert metaplectic_envelope(np.eye(2), t, np.zeros(2), np.zeros(2), 2) == pytest.approx(1.0)


# harness ------------------------------------------------------------------------


def test_verify_decay_rates():
    t = np.linspace(1, 6, 11)
    for model, rate in ((HERMITE, -1.0), (builtin("kfp", a=-2.0), -1.5), (builtin("twisted", d=1), -1.0)):
        rep = verify_decay(model, t, offsets=np.zeros((0, 2 * model.form.d)))
        assert abs(rep.fitted_rate - rate) <= 0.05 * abs(rate)
        assert rep.rate_ok(0.05)


def test_verify_decay_empty_grid():
    rep = verify_decay(HERMITE, [])
    assert len(rep.t_grid) == 0 and rep.diagonal.size == 0
    assert rep.diagonal_rows() == []


def test_offdiag_stats_finite_and_stable():
    coarse = verify_decay(HERMITE, [1.0], offsets=offset_grid(8.0, 0.5), t_offdiag=1.0)
    fine = verify_decay(HERMITE, [1.0], offsets=offset_grid(8.0, 0.25), t_offdiag=1.0)
    for N in (1, 2, 3, 4):
        assert np.isfinite(coarse.sup_stats[N])
        assert 0.5 < fine.sup_stats[N] / coarse.sup_stats[N] < 2
    assert np.all(coarse.offdiag >= 0)


def test_schur_hermite_refinement():
    a = schur_bound(HERMITE, 1.0)
    b = schur_bound(HERMITE, 1.0, step=0.125)
    assert a.row == pytest.approx(b.row, rel=0.01)
    assert a.col == pytest.approx(b.col, rel=0.01)
    assert a.row == pytest.approx(a.row_closed, rel=1e-6)
    assert max(a.row, a.col) <= a.ratio * math.exp(-1) * (1 + 1e-12)


@pytest.mark.parametrize("model", [HERMITE, builtin("kfp", a=-2.0)], ids=["hermite", "kfp"])
def test_schur_at_zero_is_overlap_mass(model):
    d = model.form.d
    # int |<pi(z)g, pi(w)g>| dw = (2 pi)^{-d} int e^{-|w|^2/4} dw = 2^d
    est = schur_bound(model, 0.0) if d == 1 else None
    if est is not None:
        assert est.row == pytest.approx(2.0**d, rel=1e-6)
    k = kernel(model, 0.0).gaussian.abs()
    half = k.n // 2
    assert k.integrate(np.arange(half)).sup_abs() == pytest.approx(2.0**d, rel=1e-10)


def test_schur_mixed_ratio_stable():
    ratios = [schur_bound(MIXED, t).ratio for t in (0.5, 1.0, 2.0)]
    assert max(ratios) / min(ratios) < 2


def test_schur_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        schur_bound(MIXED, 2.0, adaptive=False)


def test_fractional_exponent():
    assert fractional_exponent(1.0, 0.5, 4.0) == pytest.approx(math.exp(-4))
    assert fractional_exponent(4.0, 0.5, 1.0) == pytest.approx(math.exp(-2))
    assert fractional_exponent(2.0, 1 - 1e-8, 1.5) == pytest.approx(math.exp(-3), rel=1e-6)
    with pytest.raises(ValueError):
        fractional_exponent(1.0, 1.0, 1.0)
