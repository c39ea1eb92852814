"""Symplectic diagonalization of complex quadratic forms, the decay exponent,
the spectrum of the quantized form, Williamson and Euler decompositions.
"""

from dataclasses import dataclass
import itertools

import numpy as np
from scipy.linalg import expm, polar

from .errors import (
    NonDiagonalizable,
    NotPositiveDefinite,
    NotSymplectic,
    PairingFailure,
    RealEigenvalue,
)
from .form import symplectic_J
from .matrixcore import CLUSTER_RADIUS, cluster_values, eig, pair_opposites, sort_key

TAKAGI_TOL = 1e-8
REAL_EIG_TOL = 1e-9
SQRT_2I = np.sqrt(2j)


@dataclass(frozen=True, eq=False)
class TakagiFactorization:
    """Symplectic P with P^T Q P = diag(i Lambda, i Lambda), Im Lambda > 0."""

    P: np.ndarray
    Lambda: np.ndarray
    Q: np.ndarray
    symplectic_residual: float
    diagonal_residual: float
    pairing_residual: float

    @property
    def d(self):
        return self.Lambda.shape[0]

    @property
    def D(self):
        return np.diag(np.concatenate([1j * self.Lambda, 1j * self.Lambda]))


@dataclass(frozen=True, eq=False)
class SpectrumLattice:
    """Bottom of the spectrum of q^w with multiplicities.

    ``points`` and ``multiplicities`` are aligned and sorted by decreasing
    real part; ``generators`` are the values i*lambda_j (Re < 0).
    """

    mu0: complex
    generators: np.ndarray
    points: np.ndarray
    multiplicities: np.ndarray


@dataclass(frozen=True, eq=False)
class EulerDecomposition:
    """S = U^T (Sigma + Sigma^{-1}) V with U, V orthogonal symplectic."""

    U: np.ndarray
    Sigma: np.ndarray
    V: np.ndarray

    @property
    def middle(self):
        return np.diag(np.concatenate([self.Sigma, 1 / self.Sigma]))

    def reconstruct(self):
        return self.U.T @ self.middle @ self.V


def _null_basis(A, m):
    """The m right singular vectors of A with smallest singular values."""
    _, _, Vh = np.linalg.svd(A)
    return Vh[-m:].conj().T if m else np.zeros((A.shape[1], 0), dtype=complex)


def _assemble(Q, groups):
    """Build P from (lambda-cluster, V, W) triples and check the residuals."""
    n = Q.shape[0]
    d = n // 2
    J = symplectic_J(d)
    P = np.zeros((n, n), dtype=complex)
    lams = []
    col = 0
    for lam_vals, V, W in groups:
        C = V.T @ J @ W
        if np.linalg.cond(C) > 1e12:
            raise PairingFailure("eigenvector pairing matrix is singular")
        W = W @ np.linalg.inv(C)
        for k in range(V.shape[1]):
            P[:, col] = SQRT_2I * (V[:, k] + W[:, k]) / 2
            P[:, d + col] = 1j * SQRT_2I * (V[:, k] - W[:, k]) / 2
            col += 1
        lams.extend(lam_vals)
    return P, np.asarray(lams, dtype=complex)


def _residuals(Q, P, lam):
    d = lam.shape[0]
    J = symplectic_J(d)
    D = np.diag(np.concatenate([1j * lam, 1j * lam]))
    sym = np.linalg.norm(P.T @ J @ P - J, 2)
    diag = np.linalg.norm(P.T @ Q @ P - D, 2) / max(np.linalg.norm(Q, 2), 1e-300)
    return float(sym), float(diag)


def takagi_symplectic(Q, tol=TAKAGI_TOL):
    """Symplectic P and Lambda with P^T Q P = diag(i Lambda, i Lambda).

    Each column pair of P comes from eigenvectors v, w of F = JQ for
    lambda and -lambda, normalized so that v^T J w = 1. Repeated
    eigenvalues are handled by null-space bases; if the residuals miss
    ``tol`` the individual eigenvectors are tried instead.
    """
    Q = np.asarray(Q, dtype=complex)
    n = Q.shape[0]
    d = n // 2
    J = symplectic_J(d)
    F = J @ Q
    es = eig(F)
    if not es.diagonalizable:
        raise NonDiagonalizable("Hamilton map is not diagonalizable")
    lam = es.eigenvalues
    if np.abs(lam.imag).min() <= REAL_EIG_TOL * max(1.0, np.abs(lam).max()):
        raise RealEigenvalue("Hamilton map has a real eigenvalue")
    _, pairing = pair_opposites(lam)
    scale = max(1.0, np.linalg.norm(F, 2))
    if pairing > 1e-6 * scale:
        raise PairingFailure(f"eigenvalues do not pair as +-lambda (residual {pairing:.2e})")

    pos_idx = np.flatnonzero(lam.imag > 0)
    neg_idx = np.flatnonzero(lam.imag < 0)
    if len(pos_idx) != d:
        raise PairingFailure("unequal numbers of eigenvalues in the upper and lower half planes")
    pos = lam[pos_idx]
    clusters = cluster_values(pos, CLUSTER_RADIUS * scale)
    eye = np.eye(n)

    def by_nullspace():
        groups = []
        for c in clusters:
            vals = pos[list(c)]
            center = vals.mean()
            m = len(c)
            V = _null_basis(F - center * eye, m)
            W = _null_basis(F + center * eye, m)
            groups.append((list(vals), V, W))
        return groups

    def by_vectors():
        groups = []
        neg = lam[neg_idx]
        used = set()
        for c in clusters:
            vals = pos[list(c)]
            V = es.vectors[:, pos_idx[list(c)]]
            picks = []
            for v in vals:
                order = np.argsort(np.abs(neg + v))
                k = next(int(i) for i in order if int(i) not in used)
                used.add(k)
                picks.append(neg_idx[k])
            groups.append((list(vals), V, es.vectors[:, picks]))
        return groups

    best = None
    for build in (by_nullspace, by_vectors):
        try:
            P, lams = _assemble(Q, build())
        except PairingFailure:
            continue
        sym, diag = _residuals(Q, P, lams)
        if best is None or max(sym, diag) < max(best[2], best[3]):
            best = (P, lams, sym, diag)
        if sym <= tol and diag <= tol:
            break
    if best is None or best[2] > tol or best[3] > tol:
        raise PairingFailure("symplectic normalization of eigenvector pairs missed tolerance")
    P, lams, sym, diag = best
    order = sort_key(lams)
    perm = np.r_[order, order + d]
    return TakagiFactorization(P[:, perm], lams[order], Q, sym, diag, float(pairing))


def decay_exponent(tf):
    """mu = sum_j Im lambda_j."""
    return float(np.sum(tf.Lambda.imag))


def spectrum(tf, cutoff):
    """Points of the spectrum of q^w with |Re| <= cutoff (the bottom point always).

    Each lambda_j contributes (1 + 2 k_j) i lambda_j; repeated lambda_j are
    enumerated separately so that multiplicities count states.
    """
    gens = 1j * tf.Lambda
    mu0 = complex(np.sum(gens))
    step = -2 * gens.real
    if np.any(step <= 0):
        raise RealEigenvalue("generators with nonnegative real part")
    budget = cutoff - abs(mu0.real)
    counts = {}
    ranges = [range(int(np.floor(max(budget, 0) / s + 1e-9)) + 1) for s in step]
    for ks in itertools.product(*ranges):
        point = mu0 + 2 * np.dot(ks, gens)
        if ks and any(ks) and abs(point.real) > cutoff * (1 + 1e-12):
            continue
        key = (round(point.real, 9), round(point.imag, 9))
        counts[key] = counts.get(key, 0) + 1
    keys = sorted(counts, key=lambda k: (-k[0], k[1]))
    points = np.array([complex(*k) for k in keys])
    mult = np.array([counts[k] for k in keys])
    if abs(-mu0.real - decay_exponent(tf)) > 1e-9 * max(1.0, abs(mu0)):
        raise AssertionError("bottom of spectrum disagrees with the decay exponent")
    return SpectrumLattice(mu0, gens, points, mult)


def _sym_sqrt(M, inverse=False):
    w, U = np.linalg.eigh(M)
    p = -0.5 if inverse else 0.5
    return (U * w**p) @ U.T


def williamson(M, tol=1e-12):
    """Symplectic K and nu > 0 (ascending) with K^T M K = diag(nu) + diag(nu)."""
    M = np.asarray(M, dtype=float)
    M = (M + M.T) / 2
    n2 = M.shape[0]
    n = n2 // 2
    w = np.linalg.eigvalsh(M)
    if w.min() <= tol * max(1.0, w.max()):
        raise NotPositiveDefinite(f"matrix is not positive definite (min eigenvalue {w.min():.3e})")
    J = symplectic_J(n)
    Mi = _sym_sqrt(M, inverse=True)
    B = Mi @ J @ Mi
    vals, vecs = np.linalg.eigh(1j * B)
    neg = np.flatnonzero(vals < 0)
    order = neg[np.argsort(vals[neg])]
    u = vecs[:, order]
    nu = -1 / vals[order]
    O = np.sqrt(2) * np.hstack([u.real, u.imag])
    K = Mi @ O @ np.diag(np.sqrt(np.concatenate([nu, nu])))
    return K, nu


def _isotropic_basis(P, J):
    """Orthonormal isotropic eigenvectors of P for its n largest eigenvalues."""
    n = P.shape[0] // 2
    vals, vecs = np.linalg.eigh(P)
    order = np.argsort(-vals)
    vals, vecs = vals[order], vecs[:, order]
    chosen = []
    sigmas = []
    i = 0
    while len(chosen) < n:
        v = vals[i]
        group = [k for k in range(i, len(vals)) if abs(vals[k] - v) <= 1e-9 * max(1.0, v)]
        i = group[-1] + 1
        if v < 1 - 1e-9:
            break
        space = vecs[:, group]
        if abs(v - 1) <= 1e-9:
            # J-invariant eigenspace: take half of it isotropically
            basis = []
            for k in range(space.shape[1]):
                x = space[:, k].copy()
                for b in basis:
                    x -= (b @ x) * b + ((J @ b) @ x) * (J @ b)
                if np.linalg.norm(x) > 1e-6:
                    basis.append(x / np.linalg.norm(x))
                if len(chosen) + len(basis) == n:
                    break
            new = basis
        else:
            new = [space[:, k] for k in range(space.shape[1])]
        for x in new:
            if len(chosen) < n:
                chosen.append(x)
                sigmas.append(v)
    if len(chosen) != n:
        raise NotSymplectic("eigenvalues of the polar factor do not pair reciprocally")
    return np.column_stack(chosen), np.array(sigmas)


def euler_decomposition(S, tol=1e-9):
    """Euler (symplectic singular value) decomposition of a real symplectic S."""
    S = np.asarray(S, dtype=float)
    n2 = S.shape[0]
    if S.ndim != 2 or n2 != S.shape[1] or n2 % 2:
        raise NotSymplectic(f"expected an even square matrix, got {S.shape}")
    n = n2 // 2
    J = symplectic_J(n)
    if np.linalg.norm(S.T @ J @ S - J, 2) > tol * max(1.0, np.linalg.norm(S, 2) ** 2):
        raise NotSymplectic("input is not symplectic")
    O, P = polar(S, side="left")
    P = (P + P.T) / 2
    A, sig = _isotropic_basis(P, J)
    Y = np.hstack([A, -J @ A])
    return EulerDecomposition(Y.T, sig, Y.T @ O)


def dispersive_flow(F2, t):
    """Linear symplectic flow exp(2t Im F2) of the dispersive part."""
    F2 = np.asarray(F2)
    return expm(2 * t * F2.imag) if F2.size else np.zeros((0, 0))


def dispersive_singular_values(F2, t):
    """The n largest singular values (descending) of exp(2t Im F2)."""
    H = dispersive_flow(F2, t)
    n = H.shape[0] // 2
    s = np.linalg.svd(H, compute_uv=False)
    return np.sort(s)[::-1][:n]
