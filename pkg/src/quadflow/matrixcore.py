"""Dense complex linear algebra: eigensystems, matrix trigonometry, kernels
and subspace arithmetic.

Everything here is a pure function of its inputs.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import (
    EigenSolverError,
    ExceptionalTime,
    MatrixFunctionError,
    NonSquareError,
)

RANK_TOL = 1e-10
CLUSTER_RADIUS = 1e-8
COND_LIMIT = 1e8
EXCEPTIONAL_TOL = 1e-12


def as_square(M, name="matrix"):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonSquareError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (sorted by Im desc, Re asc) and right eigenvectors.

    ``clusters`` lists index groups of eigenvalues treated as numerically equal.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    diagonalizable: bool
    condition: float
    clusters: tuple

    def residual(self, M):
        """Column-wise max of ||M v - lambda v|| / ||M||."""
        scale = max(np.linalg.norm(M, 2), 1e-300)
        R = M @ self.vectors - self.vectors * self.eigenvalues
        return float(np.max(np.linalg.norm(R, axis=0)) / scale)


@dataclass(frozen=True)
class Subspace:
    """Orthonormal real basis (columns) of a subspace of R^n."""

    basis: np.ndarray

    @property
    def ambient(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    def projector(self):
        return self.basis @ self.basis.T

    @classmethod
    def full(cls, n):
        return cls(np.eye(n))

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, 0)))

    @classmethod
    def span(cls, vectors, tol=RANK_TOL):
        """Orthonormalize the columns of ``vectors``."""
        V = np.atleast_2d(np.asarray(vectors, dtype=float))
        if V.size == 0:
            return cls.zero(V.shape[0])
        U, s, _ = np.linalg.svd(V, full_matrices=False)
        rank = int(np.sum(s > tol * max(s[0], 1e-300)))
        return cls(U[:, :rank])


def sort_key(values):
    """Index order sorting by (Im desc, Re asc)."""
    values = np.asarray(values)
    scale = max(1.0, float(np.abs(values).max(initial=0.0)))
    im = np.round(values.imag / scale, 10)
    return np.lexsort((values.real, -im))


def cluster_values(values, radius):
    """Single-linkage clusters of complex values within ``radius``."""
    n = len(values)
    labels = list(range(n))

    def find(i):
        while labels[i] != i:
            labels[i] = labels[labels[i]]
            i = labels[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= radius:
                labels[find(j)] = find(i)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return tuple(tuple(g) for g in sorted(groups.values()))


def eig(M, tol=RANK_TOL, cluster_radius=CLUSTER_RADIUS):
    """Eigendecomposition with a checked diagonalizability flag.

    Per cluster of eigenvalues, the geometric multiplicity is read off the
    numerical rank of ``M - center*I`` and compared with the cluster size.
    """
    M = as_square(M)
    n = M.shape[0]
    if n == 0:
        return EigenSystem(np.zeros(0, complex), np.zeros((0, 0), complex), True, 1.0, ())
    try:
        w, V = np.linalg.eig(M.astype(complex))
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(str(exc)) from exc
    order = sort_key(w)
    w, V = w[order], V[:, order]
    scale = max(1.0, np.linalg.norm(M, 2))
    clusters = cluster_values(w, cluster_radius * scale)

    diagonalizable = True
    eye = np.eye(n)
    for group in clusters:
        vals = w[list(group)]
        center = vals.mean()
        diameter = max((abs(a - b) for a in vals for b in vals), default=0.0)
        s = np.linalg.svd(M - center * eye, compute_uv=False)
        threshold = tol * scale + 10 * diameter
        geometric = int(np.sum(s <= threshold))
        if geometric < len(group):
            diagonalizable = False
    try:
        condition = float(np.linalg.cond(V))
    except np.linalg.LinAlgError:
        condition = math.inf
    if not np.isfinite(condition):
        condition = math.inf
        diagonalizable = False
    return EigenSystem(w, V, diagonalizable, condition, clusters)


def pair_opposites(values):
    """Greedily match each eigenvalue with the nearest candidate for its negative.

    Returns ``(representatives, residual)`` where each representative has
    Im >= 0 (Re >= 0 on ties) and ``residual`` is the worst |lam + partner|.
    """
    values = list(np.asarray(values, dtype=complex))
    if len(values) % 2:
        raise ValueError("odd number of eigenvalues cannot be paired")
    order = sort_key(values)
    unused = [values[i] for i in order]
    reps, residual = [], 0.0
    while unused:
        lam = unused.pop(0)
        dists = [abs(lam + mu) for mu in unused]
        k = int(np.argmin(dists))
        partner = unused.pop(k)
        residual = max(residual, dists[k])
        rep = lam if (lam.imag, lam.real) >= (partner.imag, partner.real) else partner
        reps.append(rep)
    reps = np.array(reps)
    return reps[sort_key(reps)], residual


def _series_trig(A):
    """Scaled Taylor series for (cos A, sin A) with double-angle recovery.

    Returns cos, sin and an a-priori bound on the truncation error.
    """
    n = A.shape[0]
    eye = np.eye(n, dtype=complex)
    norm = np.linalg.norm(A, 1)
    s = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    B = A / 2**s
    b = norm / 2**s
    C, S = eye.copy(), B.copy()
    term_c, term_s = eye.copy(), B.copy()
    B2 = B @ B
    k = 1
    while True:
        term_c = -term_c @ B2 / ((2 * k - 1) * (2 * k))
        term_s = -term_s @ B2 / ((2 * k) * (2 * k + 1))
        C += term_c
        S += term_s
        remainder = b ** (2 * k + 2) / math.factorial(2 * k + 2) * math.cosh(b)
        k += 1
        if remainder < 1e-18 or k > 40:
            break
    for _ in range(s):
        C, S = 2 * C @ C - eye, 2 * S @ C
    bound = remainder * 4**s * math.exp(norm)
    return C, S, bound


def trig_path(F, cond_limit=COND_LIMIT):
    """'eigen' when the eigenvector matrix is well conditioned, else 'series'."""
    es = eig(F)
    return "eigen" if es.condition < cond_limit else "series"


def matrix_trig(F, t, cond_limit=COND_LIMIT, tol=1e-8):
    """Return ``(cos(tF), sin(tF))``.

    Uses ``V diag(cos(t lam)) V^-1`` when cond(V) < ``cond_limit``; otherwise
    falls back to a scaled Taylor series.  In both cases the residual of
    cos^2 + sin^2 = I is checked relative to the size of the factors.
    """
    F = as_square(F, "F").astype(complex)
    n = F.shape[0]
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return np.eye(n, dtype=complex), np.zeros((n, n), dtype=complex)
    es = eig(F)
    if es.condition < cond_limit:
        V = es.vectors
        lam = es.eigenvalues * t
        C = np.linalg.solve(V.T, (V * np.cos(lam)).T).T
        S = np.linalg.solve(V.T, (V * np.sin(lam)).T).T
        if _identity_residual(C, S) <= tol * max(1.0, es.condition) * 1e-2:
            return C, S
    C, S, bound = _series_trig(t * F)
    if _identity_residual(C, S) > tol or not np.isfinite(bound):
        raise MatrixFunctionError(
            f"series fallback for cos/sin(tF) exceeded its error budget (t={t})"
        )
    return C, S


def _identity_residual(C, S):
    n = C.shape[0]
    R = C @ C + S @ S - np.eye(n)
    scale = max(1.0, np.linalg.norm(C, 2) ** 2 + np.linalg.norm(S, 2) ** 2)
    return np.linalg.norm(R, 2) / scale


def exceptional_threshold(C, tol=EXCEPTIONAL_TOL):
    n = C.shape[0]
    return tol * max(1.0, np.linalg.norm(C, 2) ** n)


def tan_of(F, t, tol=1e-7):
    """``sin(tF) cos(tF)^-1``, checked against ``cos(tF)^-1 sin(tF)``.

    Raises ExceptionalTime when cos(tF) is numerically singular.
    """
    C, S = matrix_trig(F, t)
    n = C.shape[0]
    if t == 0:
        return np.zeros((n, n), dtype=complex)
    det = abs(np.linalg.det(C))
    threshold = exceptional_threshold(C)
    if det <= threshold:
        raise ExceptionalTime(t, det, threshold)
    right = np.linalg.solve(C.T, S.T).T
    left = np.linalg.solve(C, S)
    gap = np.linalg.norm(right - left, 2) / max(1.0, np.linalg.norm(right, 2))
    if gap > tol * max(1.0, np.linalg.cond(C)) * 1e-6 and gap > tol:
        raise MatrixFunctionError(f"sin/cos factors fail to commute (gap {gap:.2e})")
    return right


def kernel(M, tol=RANK_TOL, scale=None):
    """Orthonormal basis of the null space of a real matrix.

    Singular values at or below ``tol * max(sigma_max, scale)`` count as zero.
    ``scale`` guards against reading rounding noise as rank when ``M`` is a
    product that should vanish.
    """
    M = np.atleast_2d(np.asarray(M))
    if np.iscomplexobj(M):
        if np.abs(M.imag).max(initial=0.0) > 0:
            raise ValueError("kernel expects a real matrix")
        M = M.real
    n = M.shape[1]
    if M.shape[0] == 0:
        return Subspace.full(n)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    ref = max(s[0] if s.size else 0.0, scale or 0.0)
    rank = int(np.sum(s > tol * ref))
    return Subspace(Vh[rank:].T.copy())


def intersect(subspaces, ambient=None, tol=RANK_TOL):
    """Intersection of subspaces, as the kernel of stacked complement projectors."""
    subspaces = list(subspaces)
    if not subspaces:
        if ambient is None:
            raise ValueError("ambient dimension required for an empty intersection")
        return Subspace.full(ambient)
    dims = {s.ambient for s in subspaces}
    if len(dims) != 1 or (ambient is not None and dims != {ambient}):
        raise ValueError(f"mismatched ambient dimensions: {sorted(dims)}")
    n = dims.pop()
    eye = np.eye(n)
    stacked = np.vstack([eye - s.projector() for s in subspaces])
    return kernel(stacked, tol=tol, scale=1.0)


def subspace_distance(a, b):
    """Spectral-norm distance between orthogonal projectors."""
    return float(np.linalg.norm(a.projector() - b.projector(), 2)) if a.ambient else 0.0
