"""Serializable analysis reports, CSV sweeps and the plain-text table.

Reports hold only JSON types (dicts, lists, str, float, int, bool, None), so
``from_dict(to_dict(r)) == r`` and the JSON text, written with Python's
shortest round-trip float repr, is lossless. Complex numbers are stored as
``[re, im]`` pairs and complex matrices as ``{"re": ..., "im": ...}``.
"""

import csv
from dataclasses import asdict, dataclass, field, fields
import json
import math
from importlib import resources

import numpy as np

from .analysis import SPLIT, analyze
from .form import model_to_dict
from .spectral import dispersive_singular_values, spectrum

CSV_HEADER = ("t", "|w-z|", "|K|", "envelope", "ratio")
SIG_DIGITS = 12
SCHEMA_FILE = "report.schema.json"


def fmt(x):
    """A number with 12 significant digits."""
    if x is None:
        return "-"
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (complex, np.complexfloating)):
        # adding 0.0 turns -0.0 into 0.0
        return f"{x.real + 0.0:.{SIG_DIGITS}g}{x.imag + 0.0:+.{SIG_DIGITS}g}j"
    return f"{float(x) + 0.0:.{SIG_DIGITS}g}"


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _cplx(z):
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def _matrix(M):
    M = np.asarray(M)
    if np.iscomplexobj(M):
        return {"re": M.real.tolist(), "im": M.imag.tolist()}
    return {"re": M.astype(float).tolist(), "im": np.zeros_like(M, dtype=float).tolist()}


def matrix_from_json(data):
    return np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)


@dataclass(frozen=True)
class AnalysisReport:
    """Everything ``analyze`` prints, in JSON-ready form."""

    model: dict
    label: str
    d: int
    regime: str
    F: dict
    eigenvalue_pairs: list
    pairing_residual: float
    diagonalizable: bool
    dissipative: bool
    singular_space: dict
    split: dict
    mu: float
    mu_prime: float
    spectrum_head: list
    dispersive: list
    verification: dict = None
    extras: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown report fields: {sorted(unknown)}")
        return cls(**data)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _spectrum_head(a, cutoff):
    if a.takagi is None or a.regime != "trivial":
        return []
    lat = spectrum(a.takagi, cutoff)
    return [{"value": _cplx(p), "multiplicity": int(m)} for p, m in zip(lat.points, lat.multiplicities)]


def _split_summary(a):
    if a.regime != SPLIT or a.split is None:
        return None
    sp = a.split
    return {
        "dim_complement": 2 * sp.q1.d,
        "dim_singular": 2 * sp.n,
        "chi": _matrix(sp.chi),
        "q2": None if sp.q2 is None else np.asarray(sp.q2, dtype=float).tolist(),
        "residuals": {k: _num(v) for k, v in sp.residuals.items()},
    }


def _dispersive_rows(a, times):
    if a.regime != SPLIT or a.split is None:
        return []
    rows = []
    for t in times:
        sv = dispersive_singular_values(a.split.F2, float(t))
        rows.append({"t": float(t), "singular_values": [_num(s) for s in sv]})
    return rows


def verification_summary(report, schur=()):
    """JSON summary of a GaborReport and optional SchurEstimates."""
    out = {
        "t_grid": [float(t) for t in report.t_grid],
        "fitted_rate": _num(report.fitted_rate),
        "expected_rate": None if report.expected_rate is None else _num(report.expected_rate),
        "rate_error": _num(report.rate_error),
        "t_offdiag": float(report.t_offdiag),
        "sup_stats": {str(n): _num(v) for n, v in report.sup_stats.items()},
        "schur": [
            {
                "t": s.t,
                "row": _num(s.row),
                "col": _num(s.col),
                "row_closed": _num(s.row_closed),
                "col_closed": _num(s.col_closed),
                "tail": _num(s.tail),
                "reference": _num(s.reference),
                "ratio": _num(s.ratio),
            }
            for s in schur
        ],
    }
    if report.fractional:
        out["fractional"] = {k: _num(v) if isinstance(v, float) else v for k, v in report.fractional.items()}
    return out


def build_report(model, times=(), spectrum_cutoff=8.0, verification=None):
    """AnalysisReport for a model; ``times`` are the sample times for the dispersive flow."""
    a = analyze(model)
    ssr = a.singular
    extras = {}
    if a.spec.name == "kfp" and a.mu is not None:
        # the shifted generator -q^w - 1/2 decays at rate mu - 1/2
        extras["kfp_shifted_rate"] = _num(a.mu - 0.5)
    if a.errors:
        extras["errors"] = dict(sorted(a.errors.items()))
    return AnalysisReport(
        model=model_to_dict(a.spec),
        label=a.label,
        d=int(a.d),
        regime=a.regime,
        F=_matrix(a.F),
        eigenvalue_pairs=[_cplx(lam) for lam in a.pairs],
        pairing_residual=_num(a.pairing_residual),
        diagonalizable=bool(a.eigensystem.diagonalizable),
        dissipative=bool(a.dissipative),
        singular_space={
            "dim": int(ssr.dim),
            "symplectic": bool(ssr.is_symplectic),
            "basis": np.asarray(ssr.basis.basis, dtype=float).T.tolist(),
        },
        split=_split_summary(a),
        mu=None if a.mu is None else _num(a.mu),
        mu_prime=None if a.mu_prime is None else _num(a.mu_prime),
        spectrum_head=_spectrum_head(a, spectrum_cutoff),
        dispersive=_dispersive_rows(a, times),
        verification=verification,
        extras=extras,
        warnings=list(a.warnings),
    )


def load_schema():
    text = resources.files("quadflow").joinpath(SCHEMA_FILE).read_text(encoding="utf-8")
    return json.loads(text)


def validate_report(data):
    """Validate a report dict against the published schema (needs jsonschema)."""
    import jsonschema

    jsonschema.validate(data, load_schema())


def format_table(report):
    """Human-readable summary with 12 significant digits."""
    lines = [f"model            {report.label}", f"regime           {report.regime}"]
    lines.append(f"dissipative      {report.dissipative}")
    lines.append(f"diagonalizable   {report.diagonalizable}")
    pairs = ", ".join(f"+-({fmt(complex(*p))})" for p in report.eigenvalue_pairs)
    lines.append(f"eigenvalues      {pairs}")
    ss = report.singular_space
    lines.append(f"dim S            {ss['dim']} (symplectic: {ss['symplectic']})")
    if report.split:
        lines.append(f"split dims       complement {report.split['dim_complement']}, S {report.split['dim_singular']}")
    lines.append(f"mu               {fmt(report.mu)}")
    lines.append(f"mu'              {fmt(report.mu_prime)}")
    if "kfp_shifted_rate" in report.extras:
        lines.append(f"shifted rate     {fmt(report.extras['kfp_shifted_rate'])}")
    if report.spectrum_head:
        head = ", ".join(f"{fmt(complex(*s['value']))} (x{s['multiplicity']})" for s in report.spectrum_head[:6])
        lines.append(f"spectrum head    {head}")
    for row in report.dispersive:
        sv = ", ".join(fmt(s) for s in row["singular_values"])
        lines.append(f"sigma(t={fmt(row['t'])})    {sv}")
    v = report.verification
    if v:
        lines.append(f"fitted rate      {fmt(v['fitted_rate'])} (expected {fmt(v['expected_rate'])})")
        for n, s in v["sup_stats"].items():
            lines.append(f"sup N={n}          {fmt(s)}")
        for s in v["schur"]:
            lines.append(f"schur t={fmt(s['t'])}      row {fmt(s['row'])} col {fmt(s['col'])} ratio {fmt(s['ratio'])}")
    for w in report.warnings:
        lines.append(f"warning          {w}")
    return "\n".join(lines) + "\n"


def write_csv(path, rows):
    """Write (t, |w-z|, |K|, envelope, ratio) rows with a header, LF line endings."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([fmt(x) for x in row])
