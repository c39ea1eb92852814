import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from quadflow.errors import DimensionError, ModelError
from quadflow.form import (
    ModelWarning,
    QuadraticForm,
    builtin,
    custom,
    dump_model,
    evaluate,
    from_parts,
    hamilton_map,
    load_model,
    model_from_dict,
    model_to_dict,
    symplectic_J,
    validate_dissipative,
)


def test_hermite_hamilton_map_is_minus_J():
    f = builtin("hermite", d=2).form
    assert np.allclose(f.Q, -np.eye(4))
    assert np.allclose(hamilton_map(f), -symplectic_J(2))


def test_zero_form_has_zero_map():
    assert np.allclose(hamilton_map(QuadraticForm(np.zeros((2, 2)))), 0)


def test_kfp_hamilton_map():
    a = -2.0
    F = hamilton_map(builtin("kfp", a=a).form)
    # rows follow J = [[0, I], [-I, 0]] applied to Q in the order (x, v, xi, eta)
    expected = np.array(
        [
            [0, -0.5j, 0, 0],
            [0.5j * a, 0, 0, -1],
            [0, 0, 0, -0.5j * a],
            [0, 0.25, 0.5j, 0],
        ]
    )
    assert np.allclose(F, expected)


def test_evaluate_hermite():
    f = builtin("hermite", d=1).form
    assert evaluate(f, [1.0, 0.0]) == -1
    assert evaluate(f, [0.0, 0.0]) == 0


def test_evaluate_kfp_symbolic():
    a = 2.0
    x, v, xi, eta = 1.0, 1.0, 1.0, 1.0
    expected = -(eta**2) - v**2 / 4 - 1j * (v * xi - a * x * eta)
    assert evaluate(builtin("kfp", a=a).form, [x, v, xi, eta]) == pytest.approx(expected)


def test_evaluate_dimension_mismatch():
    with pytest.raises(DimensionError):
        evaluate(builtin("hermite", d=1).form, [1.0, 2.0, 3.0])


def test_validate_dissipative():
    assert validate_dissipative(QuadraticForm(-np.eye(2)))
    assert not validate_dissipative(QuadraticForm(np.eye(2)))
    f = builtin("twisted", d=1).form
    assert validate_dissipative(f)
    assert np.linalg.eigvalsh(f.real).max() <= 1e-12


def test_mixed_model_form():
    f = builtin("mixed", d1=1, d2=1).form
    z = np.array([0.3, -1.2, 0.7, 2.0])  # (x1, x2, xi1, xi2)
    expected = -(z[0] ** 2 + z[2] ** 2) + 1j * z[3] ** 2
    assert evaluate(f, z) == pytest.approx(expected)


def test_builtin_errors_and_warnings():
    with pytest.raises(ModelError):
        builtin("kfp", a=0)
    with pytest.raises(ModelError):
        builtin("nonsense")
    with pytest.raises(ModelError):
        builtin("hermite", d=0)
    with pytest.warns(ModelWarning, match="NonDiagonalizable"):
        spec = builtin("kfp", a=0.25)
    assert spec.warnings


def test_from_parts_symmetrizes_with_warning():
    with pytest.warns(ModelWarning):
        f, notes = from_parts([[-1.0, 1.0], [0.0, -1.0]])
    assert np.allclose(f.Q, [[-1, 0.5], [0.5, -1]])
    assert notes


def test_asymmetric_form_rejected():
    with pytest.raises(ModelError):
        QuadraticForm(np.array([[0.0, 1.0], [0.0, 0.0]]))


@pytest.mark.parametrize("suffix", [".json", ".toml"])
@pytest.mark.parametrize(
    "spec",
    [
        builtin("hermite", d=2),
        builtin("kfp", a=-2.0),
        builtin("mixed", d1=1, d2=1),
        custom([[-1.0, 0.1], [0.1, -0.5]], [[0.0, 0.3], [0.3, 1.0 / 3.0]]),
    ],
    ids=lambda s: s.label,
)
def test_model_file_round_trip(tmp_path, spec, suffix):
    path = tmp_path / f"model{suffix}"
    dump_model(spec, path)
    back = load_model(path)
    assert back.name == spec.name
    assert np.array_equal(back.form.Q, spec.form.Q)
    assert model_to_dict(back) == model_to_dict(spec)


def test_model_from_dict_shapes():
    assert model_from_dict({"name": "hermite", "d": 2}).form.d == 2
    assert model_from_dict({"ReQ": [[-1, 0], [0, -1]]}).name == "custom"
    with pytest.raises(ModelError):
        model_from_dict({"name": "custom"})
    with pytest.raises(ModelError):
        model_from_dict([1, 2])


def test_load_model_rejects_garbage(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ModelError):
        load_model(path)


sym = arrays(np.float64, (4, 4), elements=st.floats(-5, 5)).map(lambda A: A + A.T)


@settings(max_examples=100, deadline=None)
@given(sym, sym)
def test_hamilton_map_is_infinitesimally_symplectic(re, im):
    F = hamilton_map(QuadraticForm(re + 1j * im))
    J = symplectic_J(2)
    assert np.abs(J @ F + F.T @ J).max() <= 1e-12 * max(1.0, np.abs(F).max())
