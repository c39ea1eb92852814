"""One-shot analysis of a model: invariants, singular space, split and exponents."""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    FullSingularSpace,
    NonDiagonalizable,
    NonSymplecticSingularSpace,
    PairingFailure,
    QuadflowError,
    RealEigenvalue,
)
from .form import ModelSpec, QuadraticForm, hamilton_map, validate_dissipative
from .matrixcore import EigenSystem, eig, pair_opposites, trig_path
from .singular import (
    SingularSpaceResult,
    SymplecticSplit,
    check_no_real_eigenvalues,
    singular_space,
    symplectic_split,
)
from .spectral import TakagiFactorization, decay_exponent, takagi_symplectic

TRIVIAL, SPLIT, METAPLECTIC, NONSYMPLECTIC = "trivial", "split", "metaplectic", "nonsymplectic"


@dataclass(frozen=True, eq=False)
class Analysis:
    """Everything derived from a model that does not depend on t.

    ``regime`` is one of ``trivial`` (S = {0}), ``split`` (S symplectic and
    proper), ``metaplectic`` (S is everything) or ``nonsymplectic``.
    ``takagi`` factorizes q when S = {0} and q1 in the split regime.
    ``mu`` is the exponent of the full form (``None`` if F has real
    eigenvalues); ``mu_prime`` is the exponent governing the bounds.
    """

    spec: ModelSpec
    form: QuadraticForm
    F: np.ndarray
    eigensystem: EigenSystem
    pairs: np.ndarray
    pairing_residual: float
    dissipative: bool
    no_real_eigenvalues: bool
    singular: SingularSpaceResult
    regime: str
    split: SymplecticSplit = None
    takagi: TakagiFactorization = None
    mu: float = None
    mu_prime: float = None
    trig_path: str = "eigen"
    warnings: tuple = field(default=())
    errors: dict = field(default_factory=dict)

    @property
    def d(self):
        return self.form.d

    @property
    def label(self):
        return self.spec.label

    @property
    def dissipative_part(self):
        """Form with trivial singular space that carries the decay."""
        if self.regime == TRIVIAL:
            return self.form
        return self.split.q1 if self.split is not None else None

    @property
    def F1_diagonalizable(self):
        part = self.dissipative_part
        if part is None:
            return True
        return eig(hamilton_map(part)).diagonalizable


def _as_spec(model):
    if isinstance(model, ModelSpec):
        return model
    if isinstance(model, QuadraticForm):
        return ModelSpec("custom", {"ReQ": model.real.tolist(), "ImQ": model.imag.tolist()}, model)
    raise TypeError(f"expected a ModelSpec or QuadraticForm, got {type(model).__name__}")


def analyze(model):
    """Run form -> singular -> spectral on a model."""
    if isinstance(model, Analysis):
        return model
    spec = _as_spec(model)
    form = spec.form
    notes = list(spec.warnings)
    errors = {}
    F = hamilton_map(form)
    es = eig(F)
    pairs, pairing = pair_opposites(es.eigenvalues)
    dissipative = validate_dissipative(form)
    ssr = singular_space(F)
    no_real = check_no_real_eigenvalues(F, ssr=ssr)
    if not es.diagonalizable:
        notes.append("NonDiagonalizable: Hamilton map has a nontrivial Jordan block")

    split = None
    if not ssr.is_symplectic:
        regime = NONSYMPLECTIC
        notes.append(f"NonSymplecticSingularSpace: dim S = {ssr.dim} is not symplectic")
    elif ssr.dim == 0:
        regime = TRIVIAL
    elif ssr.dim == 2 * form.d:
        regime = METAPLECTIC
        notes.append("FullSingularSpace: Re q = 0, the semigroup is metaplectic (mu = 0)")
    else:
        regime = SPLIT
        try:
            split = symplectic_split(form, ssr)
        except (NonSymplecticSingularSpace, FullSingularSpace, QuadflowError) as exc:
            errors["split"] = str(exc)
            notes.append(f"split failed: {exc}")

    takagi = mu = mu_prime = None
    try:
        mu = decay_exponent(takagi_symplectic(form.Q))
    except (NonDiagonalizable, RealEigenvalue, PairingFailure) as exc:
        errors["takagi_full"] = f"{type(exc).__name__}: {exc}"
    part = form if regime == TRIVIAL else (split.q1 if split is not None else None)
    if regime == METAPLECTIC:
        mu_prime = 0.0
    elif part is not None:
        try:
            takagi = takagi_symplectic(part.Q)
            mu_prime = decay_exponent(takagi)
        except (NonDiagonalizable, RealEigenvalue, PairingFailure) as exc:
            errors["takagi"] = f"{type(exc).__name__}: {exc}"
            notes.append(f"{type(exc).__name__}: {exc}")
    return Analysis(
        spec=spec,
        form=form,
        F=F,
        eigensystem=es,
        pairs=pairs,
        pairing_residual=pairing,
        dissipative=dissipative,
        no_real_eigenvalues=no_real,
        singular=ssr,
        regime=regime,
        split=split,
        takagi=takagi,
        mu=mu,
        mu_prime=mu_prime,
        trig_path=trig_path(F),
        warnings=tuple(dict.fromkeys(notes)),
        errors=errors,
    )
