"""Singular space of a quadratic form and the split q = q1 + i q2 along it."""

from dataclasses import dataclass
import warnings

import numpy as np

from .errors import FullSingularSpace, NonSymplecticSingularSpace, QuadflowError
from .form import QuadraticForm, symplectic_J
from .matrixcore import RANK_TOL, Subspace, eig, intersect, kernel

SYMPLECTIC_TOL = 1e-8
SPLIT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SingularSpaceResult:
    """S with its symplectic complement and the Gram matrix of sigma on S."""

    basis: Subspace
    is_symplectic: bool
    complement: Subspace
    gram: np.ndarray

    @property
    def dim(self):
        return self.basis.dim

    @property
    def ambient(self):
        return self.basis.ambient


@dataclass(frozen=True, eq=False)
class SymplecticSplit:
    """Symplectic chi with (q o chi)(x', x'', xi', xi'') = q1(x', xi') + i q2(x'', xi'').

    ``q2`` is the real symmetric matrix of the dispersive part, or ``None``
    when S = {0}. ``residuals`` records the numerical checks.
    """

    chi: np.ndarray
    q1: QuadraticForm
    q2: np.ndarray
    F1: np.ndarray
    F2: np.ndarray
    residuals: dict

    @property
    def n(self):
        """Half the dimension of S."""
        return 0 if self.q2 is None else self.q2.shape[0] // 2

    def to_split_coordinates(self, z):
        """z~ = chi^{-1} z, returned as (z~', z~'')."""
        zt = np.linalg.solve(self.chi, np.asarray(z, dtype=float))
        d1 = self.q1.d
        n = self.n
        dd = d1 + n
        prime = np.r_[zt[:d1], zt[dd : dd + d1]]
        second = np.r_[zt[d1:dd], zt[dd + d1 :]]
        return prime, second


def _scale(M):
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def singular_space(F, tol=RANK_TOL):
    """S = intersection over j < 2d of ker(Re F (Im F)^j), restricted to R^{2d}."""
    F = np.asarray(F, dtype=complex)
    n = F.shape[0]
    ReF, ImF = F.real, F.imag
    re_norm, im_norm = _scale(ReF), _scale(ImF)
    pieces = []
    M = ReF.copy()
    for j in range(n):
        pieces.append(kernel(M, tol=tol, scale=re_norm * im_norm**j))
        M = M @ ImF
    S = intersect(pieces, ambient=n, tol=tol)
    comp = symplectic_complement(S)
    J = symplectic_J(n // 2)
    gram = S.basis.T @ J @ S.basis
    if S.dim == 0:
        symplectic = True
    elif S.dim % 2:
        symplectic = False
    else:
        symplectic = bool(np.linalg.svd(gram, compute_uv=False).min() > SYMPLECTIC_TOL)
    return SingularSpaceResult(S, symplectic, comp, gram)


def symplectic_complement(S):
    """{w : sigma(w, v) = 0 for all v in S}."""
    J = symplectic_J(S.ambient // 2)
    return kernel(S.basis.T @ J, scale=1.0)


def check_no_real_eigenvalues(F, tol=1e-9, ssr=None):
    """True iff every eigenvalue of F has |Im| > tol.

    With ``ssr`` given, a trivial singular space together with a real
    eigenvalue is reported as an inconsistency warning.
    """
    lam = eig(F).eigenvalues
    ok = bool(lam.size == 0 or np.abs(lam.imag).min() > tol)
    if ssr is not None and ssr.dim == 0 and not ok:
        warnings.warn(
            "trivial singular space but F has a real eigenvalue; tolerances disagree",
            RuntimeWarning,
            stacklevel=2,
        )
    return ok


def darboux_basis(vectors, pairs, tol=SYMPLECTIC_TOL):
    """Symplectic Gram-Schmidt: columns (E, F) with E^T J F = I, E^T J E = F^T J F = 0.

    ``vectors`` spans the target subspace (columns may be redundant).
    Each step pivots on the pair with the largest |sigma|.
    """
    R = np.array(vectors, dtype=float, copy=True)
    n = R.shape[0]
    J = symplectic_J(n // 2)
    E, Fs = [], []
    for _ in range(pairs):
        omega = R.T @ J @ R
        i, j = np.unravel_index(np.argmax(np.abs(omega)), omega.shape)
        c = omega[i, j]
        if abs(c) <= tol:
            raise NonSymplecticSingularSpace("sigma degenerates during symplectic Gram-Schmidt")
        e = R[:, i] / np.sqrt(abs(c))
        f = np.sign(c) * R[:, j] / np.sqrt(abs(c))
        w_f = f @ J @ R
        w_e = e @ J @ R
        R = R + np.outer(e, w_f) - np.outer(f, w_e)
        R = np.delete(R, [i, j], axis=1)
        E.append(e)
        Fs.append(f)
    if not E:
        return np.zeros((n, 0)), np.zeros((n, 0))
    return np.column_stack(E), np.column_stack(Fs)


def symplectic_split(f, ssr):
    """Split q along S and its symplectic complement.

    Columns of chi are ordered (x', x'', xi', xi''), with the primed block
    spanning the complement and the double-primed block spanning S.
    """
    d = f.d
    if not ssr.is_symplectic:
        raise NonSymplecticSingularSpace(
            f"singular space of dimension {ssr.dim} is not symplectic"
        )
    if ssr.dim == 2 * d:
        raise FullSingularSpace("S is the whole phase space; the semigroup is metaplectic")
    n = ssr.dim // 2
    d1 = d - n
    Pc = ssr.complement.projector()
    Ps = ssr.basis.projector()
    E1, F1b = darboux_basis(Pc, d1)
    E2, F2b = darboux_basis(Ps, n)
    chi = np.column_stack([E1, E2, F1b, F2b])
    J = symplectic_J(d)
    Qt = chi.T @ f.Q @ chi

    prime = np.r_[0:d1, d : d + d1]
    second = np.r_[d1:d, d + d1 : 2 * d]
    Q1 = Qt[np.ix_(prime, prime)]
    Q2 = Qt[np.ix_(second, second)]
    qnorm = max(_scale(f.Q), 1e-300)
    residuals = {
        "symplectic": float(np.linalg.norm(chi.T @ J @ chi - J, 2)),
        "off_block": _scale(Qt[np.ix_(prime, second)]) / qnorm,
        "q2_real_part": _scale(Q2.real) / qnorm,
    }
    if residuals["symplectic"] > SPLIT_TOL * max(1.0, np.linalg.norm(chi, 2) ** 2):
        raise QuadflowError(f"split basis not symplectic (residual {residuals['symplectic']:.2e})")
    if residuals["off_block"] > 1e-8 or residuals["q2_real_part"] > 1e-8:
        raise QuadflowError(f"split leaves cross terms: {residuals}")

    q1 = QuadraticForm((Q1 + Q1.T) / 2)
    F1 = symplectic_J(d1) @ q1.Q
    residuals["q1_singular_dim"] = singular_space(F1).dim
    if n:
        q2 = ((Q2.imag + Q2.imag.T) / 2).copy()
        F2 = 1j * symplectic_J(n) @ q2
    else:
        q2 = None
        F2 = np.zeros((0, 0), dtype=complex)
    return SymplecticSplit(chi, q1, q2, F1, F2, residuals)
