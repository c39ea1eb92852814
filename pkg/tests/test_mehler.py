import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quadflow.analysis import analyze
from quadflow.errors import ExceptionalTime, RealEigenvalue
from quadflow.form import QuadraticForm, builtin, hamilton_map, symplectic_J
from quadflow.matrixcore import matrix_trig
from quadflow.mehler import (
    diagonal_exponent,
    exceptional_set_check,
    log_cos,
    mehler_symbol,
    prefactor_decay,
    prefactor_magnitude,
)
from quadflow.spectral import takagi_symplectic

HERMITE_F = hamilton_map(builtin("hermite", d=1).form)
KFP_F = hamilton_map(builtin("kfp", a=-2.0).form)


def test_hermite_symbol_at_one():
    sym = mehler_symbol(HERMITE_F, 1.0)
    assert sym.prefactor_magnitude == pytest.approx(1 / math.cosh(1), rel=1e-12)
    assert np.allclose(sym.exponent, -math.tanh(1) * np.eye(2), atol=1e-12)


@pytest.mark.parametrize("F", [HERMITE_F, KFP_F, hamilton_map(builtin("twisted", d=1).form)])
def test_symbol_at_zero_is_one(F):
    sym = mehler_symbol(F, 0.0)
    assert sym.log_prefactor == 0
    assert np.allclose(sym.exponent, 0)


def test_hermite_symbol_closed_form_random():
    rng = np.random.default_rng(1)
    for t, z in zip(rng.uniform(0, 10, 100), rng.normal(size=(100, 2))):
        t = max(t, 1e-6)
        expected = math.exp(-math.tanh(t) * z @ z) / math.cosh(t)
        assert abs(mehler_symbol(HERMITE_F, t)(z) - expected) <= 1e-10


def test_twisted_exponent_vanishes_on_singular_space():
    a = analyze(builtin("twisted", d=1))
    sym = mehler_symbol(a.F, 1.0)
    for v in a.singular.basis.basis.T:
        assert abs(v @ sym.exponent @ v) < 1e-12


def test_exceptional_set():
    assert not exceptional_set_check(HERMITE_F, 3.0)
    assert not exceptional_set_check(KFP_F, 0.0)
    rotation = hamilton_map(QuadraticForm(1j * np.eye(2)))
    # q = i(x^2 + xi^2): F = iJ has real eigenvalues +-1, so cos(tF) is singular at t = pi/2
    assert exceptional_set_check(rotation, math.pi / 2)
    with pytest.raises(ExceptionalTime):
        mehler_symbol(rotation, math.pi / 2)


def test_prefactor_matches_det_cos():
    for t in (0.3, 1.0, 2.5):
        C, _ = matrix_trig(KFP_F, t)
        assert prefactor_magnitude(KFP_F, t) == pytest.approx(abs(np.linalg.det(C)) ** -0.5, rel=1e-10)


def test_prefactor_decay_hermite():
    t = np.linspace(0, 10, 41)
    pd = prefactor_decay(HERMITE_F, t)
    assert pd.magnitudes[0] == pytest.approx(1.0)
    assert np.allclose(pd.magnitudes, 1 / np.cosh(t))
    assert np.all(pd.magnitudes <= 2 * np.exp(-t) + 1e-15)
    assert pd.constant == pytest.approx(2.0)


def test_prefactor_decay_kfp_slope():
    pd = prefactor_decay(KFP_F, np.linspace(0, 10, 101))
    assert pd.slope() == pytest.approx(-1.5, rel=0.02)
    assert pd.mu == pytest.approx(1.5)


def test_prefactor_decay_needs_complex_spectrum():
    with pytest.raises(RealEigenvalue):
        prefactor_decay(hamilton_map(QuadraticForm(np.diag([0.0, -1.0]))), [1.0])


def test_prefactor_decay_empty_grid():
    assert len(prefactor_decay(HERMITE_F, [])) == 0


def test_diagonal_exponent():
    tf = takagi_symplectic(builtin("hermite", d=1).form.Q)
    de = diagonal_exponent(tf, 0.0)
    assert np.allclose(de.rho, 0) and np.allclose(de.iota, 0)
    de = diagonal_exponent(tf, 1.0)
    assert de.rho[0] == pytest.approx(math.tanh(1))
    assert de.iota[0] == pytest.approx(0, abs=1e-15)
    tf = takagi_symplectic(builtin("kfp", a=-2.0).form.Q)
    de = diagonal_exponent(tf, 1.0)
    assert np.allclose(-de.rho + 1j * de.iota, 1j * np.tan(tf.Lambda), atol=1e-12)


lam = st.tuples(st.floats(-5, 5), st.floats(0.01, 5)).map(lambda p: complex(*p))


@settings(max_examples=200, deadline=None)
@given(lam, st.floats(0.0, 5.0))
def test_diagonal_exponent_identity(lmb, t):
    de = diagonal_exponent(np.array([lmb]), t)
    ref = 1j * cmath.tan(t * lmb)
    assert abs(-de.rho[0] + 1j * de.iota[0] - ref) <= 1e-12 * max(1.0, abs(ref))
    if t > 0:
        assert de.rho[0] > 0


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(0, 4))
def test_log_cos_is_a_logarithm(re, im):
    z = complex(re, im)
    assert abs(np.exp(log_cos(z)) - cmath.cos(z)) <= 1e-12 * max(1.0, abs(cmath.cos(z)))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.05, 4.0))
def test_symbol_bounded_by_prefactor(seed, t):
    from quadflow.acceptance import random_dissipative_form

    rng = np.random.default_rng(seed)
    f = random_dissipative_form(rng, 1 + seed % 2)
    sym = mehler_symbol(hamilton_map(f), t)
    assert np.allclose(sym.exponent, sym.exponent.T)
    z = rng.normal(size=(20, 2 * f.d))
    quad = np.einsum("ki,ij,kj->k", z, sym.exponent.real, z)
    assert np.all(quad <= 1e-9 * np.sum(z * z, axis=1))
    assert np.all(np.abs(sym(z)) <= sym.prefactor_magnitude * (1 + 1e-9))
