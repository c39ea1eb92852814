"""Gaussian Weyl symbol of the semigroup generated by a quadratic form.

For t outside the exceptional set the symbol is

    Theta_t(z) = det(cos tF)^{-1/2} exp(sigma(z, tan(tF) z)) = c_t exp(z^T M_t z),

with M_t the symmetric part of J^T tan(tF).
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import RealEigenvalue
from .form import symplectic_J
from .matrixcore import (
    EXCEPTIONAL_TOL,
    eig,
    exceptional_threshold,
    matrix_trig,
    pair_opposites,
    tan_of,
)

LOG2 = np.log(2.0)


@dataclass(frozen=True, eq=False)
class MehlerSymbol:
    """Theta_t(z) = exp(log_prefactor + z^T exponent z)."""

    t: float
    log_prefactor: complex
    exponent: np.ndarray

    @property
    def prefactor_magnitude(self):
        return float(np.exp(self.log_prefactor.real))

    @property
    def prefactor_phase(self):
        return float(self.log_prefactor.imag)

    @property
    def dim(self):
        return self.exponent.shape[0]

    def __call__(self, z):
        """Evaluate at a point or at the rows of an array of points."""
        z = np.asarray(z, dtype=float)
        quad = np.einsum("...i,ij,...j->...", z, self.exponent, z)
        return np.exp(self.log_prefactor + quad)


@dataclass(frozen=True, eq=False)
class DiagonalExponent:
    """i tan(t lambda_j) = -rho_j + i iota_j."""

    t: float
    rho: np.ndarray
    iota: np.ndarray


@dataclass(frozen=True, eq=False)
class PrefactorDecay:
    """|det cos(tF)|^{-1/2} on a grid with the bound C exp(-t mu)."""

    times: np.ndarray
    magnitudes: np.ndarray
    mu: float
    constant: float

    def __iter__(self):
        return iter(zip(self.times.tolist(), self.magnitudes.tolist()))

    def __len__(self):
        return len(self.times)

    def slope(self, tail=0.5):
        """Least-squares slope of log magnitude against t over the last ``tail`` of the grid."""
        return tail_slope(self.times, np.log(self.magnitudes), tail)


def tail_slope(times, values, tail=0.5):
    """Least-squares slope over the last fraction ``tail`` of the samples."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    k = len(times) - max(2, int(np.ceil(tail * len(times))))
    if len(times) < 2:
        return float("nan")
    return float(np.polyfit(times[max(k, 0) :], values[max(k, 0) :], 1)[0])


def log_cos(z):
    """Continuous branch of log cos(z) along the ray s z, s in [0, 1], for Im z >= 0.

    Uses cos z = e^{-iz}(1 + e^{2iz})/2 and |e^{2iz}| <= 1.
    """
    z = np.asarray(z, dtype=complex)
    return -1j * z + np.log1p(np.exp(2j * z)) - LOG2


def representatives(F):
    """One eigenvalue from each +-lambda pair of F (Im >= 0)."""
    reps, _ = pair_opposites(eig(F).eigenvalues)
    return reps


def exceptional_set_check(F, t, tol=EXCEPTIONAL_TOL):
    """True iff cos(tF) is numerically singular."""
    C, _ = matrix_trig(F, t)
    return bool(abs(np.linalg.det(C)) <= exceptional_threshold(C, tol))


def mehler_symbol(F, t):
    """Symbol of exp(t q^w) at time t (raises ExceptionalTime on the exceptional set)."""
    F = np.asarray(F, dtype=complex)
    n = F.shape[0]
    T = tan_of(F, t)
    JT = symplectic_J(n // 2).T @ T
    M = (JT + JT.T) / 2
    log_pref = -complex(np.sum(log_cos(t * representatives(F))))
    return MehlerSymbol(float(t), log_pref, M)


def prefactor_magnitude(F, t):
    return float(np.exp(-np.sum(log_cos(t * representatives(F)).real)))


def _factor_sup(lam):
    """sup_t |cos(t lam)|^{-1} e^{t Im lam} for Im lam > 0."""
    a, b = abs(lam.real), lam.imag

    def h(t):
        # squared ratio 2 e^{2bt} / (cos 2at + cosh 2bt), written to avoid overflow
        e = np.exp(-2 * b * t)
        return 4.0 / (1 + 2 * np.cos(2 * a * t) * e + e * e)

    horizon = 20.0 / b
    if a > 0:
        horizon = max(horizon, 4 * np.pi / a)
    grid = np.linspace(0.0, horizon, 20001)
    vals = h(grid)
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    best = max(vals[k], 4.0)
    if hi > lo:
        res = minimize_scalar(lambda s: -h(s), bounds=(lo, hi), method="bounded")
        best = max(best, -res.fun)
    return float(np.sqrt(best))


def prefactor_decay(F, t_grid):
    """Prefactor magnitudes on ``t_grid`` checked against C exp(-t mu).

    C is the product over eigenvalue pairs of sup_t |cos(t lam)|^{-1} e^{t Im lam};
    for purely imaginary lam it equals 2.
    """
    reps = representatives(F)
    if reps.size and np.abs(reps.imag).min() <= 1e-12:
        raise RealEigenvalue("prefactor bound needs Im lambda > 0")
    times = np.asarray(t_grid, dtype=float).ravel()
    mu = float(np.sum(reps.imag))
    mags = np.exp(-np.sum(log_cos(np.outer(times, reps)).real, axis=1)) if times.size else np.zeros(0)
    C = float(np.prod([_factor_sup(lam) for lam in reps]))
    bound = C * np.exp(-times * mu)
    if np.any(mags > bound * (1 + 1e-9)):
        raise AssertionError("prefactor exceeds its exponential bound")
    return PrefactorDecay(times, mags, mu, C)


def diagonal_exponent(tf, t, tol=1e-12):
    """rho_j(t), iota_j(t) with i tan(t lambda_j) = -rho_j + i iota_j."""
    lam = np.asarray(tf.Lambda if hasattr(tf, "Lambda") else tf, dtype=complex)
    x = 2 * lam.real * t
    y = 2 * lam.imag * t
    with np.errstate(over="ignore"):
        ch = np.cosh(y)
    ratio = np.cos(x) / ch
    denom = 1 + ratio
    rho = np.tanh(y) / denom
    iota = (np.sin(x) / ch) / denom
    ref = 1j * np.tan(t * lam)
    err = np.abs(ref - (-rho + 1j * iota))
    if np.any(err > tol * np.maximum(1.0, np.abs(ref)) * 10):
        raise AssertionError(f"closed forms for rho, iota disagree with i tan (err {err.max():.2e})")
    return DiagonalExponent(float(t), rho, iota)
