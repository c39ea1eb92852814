"""Quadratic forms on phase space, Hamilton maps and the built-in models.

Coordinates are z = (x, xi) in R^{2d} and the symplectic matrix is
J = [[0, I], [-I, 0]], so that sigma(z, w) = (Jz) . w and the form
q(z) = z^T Q z has Hamilton map F = J Q.
"""

from dataclasses import dataclass, field
import json
import math
from pathlib import Path
import sys
import warnings

import numpy as np

from .errors import DimensionError, ModelError, NonSquareError
from .matrixcore import as_square

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SYM_TOL = 1e-10
DISSIPATIVE_TOL = 1e-10
MODEL_NAMES = ("hermite", "twisted", "kfp", "mixed", "custom")


class ModelWarning(UserWarning):
    """A model was accepted but carries a caveat (asymmetry, Jordan block)."""


def symplectic_J(d):
    """Standard symplectic matrix of size 2d."""
    eye = np.eye(d)
    zero = np.zeros((d, d))
    return np.block([[zero, eye], [-eye, zero]])


def sigma(z, w):
    """Symplectic form sigma(z, w) = Jz . w (bilinear, no conjugation)."""
    z = np.asarray(z)
    return (symplectic_J(z.shape[0] // 2) @ z) @ np.asarray(w)


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """Complex quadratic form q(z) = z^T Q z on R^{2d}.

    Q is stored as a complex symmetric matrix. Symmetry is checked on
    construction; use :func:`from_parts` to symmetrize loose input.
    """

    Q: np.ndarray

    def __post_init__(self):
        Q = as_square(self.Q, "Q").astype(complex)
        if Q.shape[0] % 2 or Q.shape[0] == 0:
            raise DimensionError(f"Q must be 2d x 2d with d >= 1, got {Q.shape}")
        scale = max(np.linalg.norm(Q, 2), 1e-300)
        if np.linalg.norm(Q - Q.T, 2) > SYM_TOL * scale:
            raise ModelError("Q is not symmetric")
        Q.setflags(write=False)
        object.__setattr__(self, "Q", Q)

    @property
    def d(self):
        return self.Q.shape[0] // 2

    @property
    def real(self):
        return self.Q.real

    @property
    def imag(self):
        return self.Q.imag

    def __call__(self, z):
        return evaluate(self, z)


def from_parts(ReQ, ImQ=None, tol=SYM_TOL):
    """Build a form from real and imaginary parts, symmetrizing if needed.

    Returns ``(form, warnings)`` where ``warnings`` lists any repairs made.
    """
    ReQ = np.asarray(ReQ, dtype=float)
    ImQ = np.zeros_like(ReQ) if ImQ is None else np.asarray(ImQ, dtype=float)
    if ReQ.ndim != 2 or ReQ.shape != ImQ.shape or ReQ.shape[0] != ReQ.shape[1]:
        raise NonSquareError(f"ReQ and ImQ must be equal square matrices, got {ReQ.shape}, {ImQ.shape}")
    Q = ReQ + 1j * ImQ
    notes = []
    asym = np.linalg.norm(Q - Q.T, 2)
    if asym > tol * max(np.linalg.norm(Q, 2), 1e-300):
        msg = f"Q asymmetric (||Q - Q^T|| = {asym:.3e}); replaced by (Q + Q^T)/2"
        warnings.warn(msg, ModelWarning, stacklevel=2)
        notes.append(msg)
    Q = (Q + Q.T) / 2
    return QuadraticForm(Q), notes


def hamilton_map(f):
    """Hamilton map F = J Q."""
    return symplectic_J(f.d) @ f.Q


def evaluate(f, z):
    """q(z) = z^T Q z."""
    z = np.asarray(z, dtype=float)
    if z.shape != (2 * f.d,):
        raise DimensionError(f"expected a vector of length {2 * f.d}, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("z has non-finite entries")
    return complex(z @ f.Q @ z)


def polarize(f, z, w):
    """Bilinear form q(z; w) = z^T Q w."""
    return complex(np.asarray(z) @ f.Q @ np.asarray(w))


def validate_dissipative(f, tol=DISSIPATIVE_TOL):
    """True iff the largest eigenvalue of Re Q is at most ``tol``."""
    return bool(np.linalg.eigvalsh(f.real).max() <= tol)


def direct_sum(f1, f2):
    """Form on R^{2(d1+d2)} acting as f1 on (x1, xi1) and f2 on (x2, xi2).

    Coordinates are ordered (x1, x2, xi1, xi2).
    """
    d1, d2 = f1.d, f2.d
    n = 2 * (d1 + d2)
    idx1 = np.r_[0:d1, d1 + d2 : 2 * d1 + d2]
    idx2 = np.r_[d1 : d1 + d2, 2 * d1 + d2 : n]
    Q = np.zeros((n, n), dtype=complex)
    Q[np.ix_(idx1, idx1)] = f1.Q
    Q[np.ix_(idx2, idx2)] = f2.Q
    return QuadraticForm(Q)


def hermite_form(d):
    """q = -(x^2 + xi^2)."""
    return QuadraticForm(-np.eye(2 * d))


def twisted_form(d):
    """Twisted Laplacian symbol on R^{4d}, coordinates (x, y, xi, eta).

    q = -sum_j (xi_j - y_j/2)^2 + (eta_j + x_j/2)^2.
    """
    Jd = symplectic_J(d)
    eye = np.eye(2 * d)
    Q = np.block([[-eye / 4, -Jd / 2], [Jd / 2, -eye]])
    return QuadraticForm(Q)


def kfp_form(a):
    """Kramers-Fokker-Planck symbol, coordinates (x, v, xi, eta).

    q = -eta^2 - v^2/4 - i(v xi - a x eta).
    """
    Q = np.zeros((4, 4), dtype=complex)
    Q[1, 1] = -0.25
    Q[3, 3] = -1.0
    Q[1, 2] = Q[2, 1] = -0.5j
    Q[0, 3] = Q[3, 0] = 0.5j * a
    return QuadraticForm(Q)


def mixed_form(d1, d2):
    """q = -(x1^2 + xi1^2) + i xi2^2, coordinates (x1, x2, xi1, xi2)."""
    q2 = np.zeros((2 * d2, 2 * d2), dtype=complex)
    q2[d2:, d2:] = 1j * np.eye(d2)
    return direct_sum(hermite_form(d1), QuadraticForm(q2))


def _positive_int(params, key):
    value = params.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise ModelError(f"parameter {key} must be a positive integer, got {value!r}")
    return int(value)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Named or custom model with its resolved quadratic form."""

    name: str
    params: dict
    form: QuadraticForm
    warnings: tuple = field(default=())

    @property
    def label(self):
        if self.name == "custom":
            return "custom"
        args = ",".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{self.name}({args})"


def builtin(name, **params):
    """Resolve a named model.

    ``hermite(d)``, ``twisted(d)``, ``kfp(a)`` with a != 0 and
    ``mixed(d1, d2)``. ``kfp(1/4)`` resolves but carries a warning since
    its Hamilton map has a Jordan block.
    """
    notes = []
    if name == "hermite":
        d = _positive_int(params, "d")
        params, form = {"d": d}, hermite_form(d)
    elif name == "twisted":
        d = _positive_int(params, "d")
        params, form = {"d": d}, twisted_form(d)
    elif name == "kfp":
        a = params.get("a")
        if isinstance(a, bool) or not isinstance(a, (int, float, np.floating, np.integer)):
            raise ModelError(f"kfp requires a real parameter a, got {a!r}")
        a = float(a)
        if not math.isfinite(a) or a == 0.0:
            raise ModelError("kfp requires a finite nonzero parameter a")
        if abs(a - 0.25) <= 1e-12:
            msg = "NonDiagonalizable: kfp Hamilton map has a Jordan block at a = 1/4"
            warnings.warn(msg, ModelWarning, stacklevel=2)
            notes.append(msg)
        params, form = {"a": a}, kfp_form(a)
    elif name == "mixed":
        d1 = _positive_int(params, "d1")
        d2 = _positive_int(params, "d2")
        params, form = {"d1": d1, "d2": d2}, mixed_form(d1, d2)
    else:
        raise ModelError(f"unknown model {name!r}; expected one of {', '.join(MODEL_NAMES)}")
    return ModelSpec(name, params, form, tuple(notes))


def custom(ReQ, ImQ=None):
    """Model from explicit real and imaginary parts of Q."""
    ReQ = np.asarray(ReQ, dtype=float)
    ImQ = np.zeros_like(ReQ) if ImQ is None else np.asarray(ImQ, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ModelWarning)
        form, notes = from_parts(ReQ, ImQ)
    for msg in notes:
        warnings.warn(msg, ModelWarning, stacklevel=2)
    return ModelSpec("custom", {"ReQ": ReQ.tolist(), "ImQ": ImQ.tolist()}, form, tuple(notes))


def model_from_dict(data):
    """Parse the model file structure.

    Accepted shapes::

        {"name": "hermite", "d": 2}
        {"name": "kfp", "params": {"a": -2.0}}
        {"name": "custom", "ReQ": [[...]], "ImQ": [[...]]}
        {"ReQ": [[...]], "ImQ": [[...]]}
    """
    if not isinstance(data, dict):
        raise ModelError("model description must be a mapping")
    name = data.get("name", "custom" if "ReQ" in data else None)
    if name is None:
        raise ModelError("model description needs a 'name' or 'ReQ'/'ImQ' matrices")
    if name == "custom":
        if "ReQ" not in data:
            raise ModelError("custom model needs ReQ (and optionally ImQ)")
        try:
            return custom(data["ReQ"], data.get("ImQ"))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"malformed custom matrices: {exc}") from exc
    params = dict(data.get("params", {}))
    for key, value in data.items():
        if key not in ("name", "params"):
            params[key] = value
    try:
        return builtin(name, **params)
    except TypeError as exc:
        raise ModelError(str(exc)) from exc


def model_to_dict(spec):
    """Inverse of :func:`model_from_dict`."""
    if spec.name == "custom":
        return {"name": "custom", "ReQ": spec.params["ReQ"], "ImQ": spec.params["ImQ"]}
    return {"name": spec.name, "params": dict(spec.params)}


def load_model(path):
    """Read a model from a .json or .toml file."""
    path = Path(path)
    raw = path.read_bytes()
    try:
        if path.suffix.lower() == ".toml":
            data = tomllib.loads(raw.decode("utf-8"))
        else:
            data = json.loads(raw.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ModelError(f"cannot parse model file {path}: {exc}") from exc
    return model_from_dict(data)


def _toml_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ModelError("non-finite values cannot be written")
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise ModelError(f"cannot write value of type {type(value).__name__}")


def dump_model(spec, path):
    """Write a model file; the format follows the suffix (.json or .toml)."""
    path = Path(path)
    data = model_to_dict(spec)
    if path.suffix.lower() == ".toml":
        lines = [f"name = {_toml_value(data['name'])}"]
        top = {k: v for k, v in data.items() if k not in ("name", "params")}
        lines += [f"{k} = {_toml_value(v)}" for k, v in top.items()]
        if "params" in data:
            lines.append("")
            lines.append("[params]")
            lines += [f"{k} = {_toml_value(v)}" for k, v in data["params"].items()]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(data, indent=2) + "\n"
    path.write_text(text, encoding="utf-8", newline="\n")
