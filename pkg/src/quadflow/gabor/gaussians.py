"""Closed-form calculus for complex Gaussians exp(-v^T A v / 2 + b^T v + c).

Wave packets, Wigner transforms and Gabor transforms of Gaussians are all
Gaussians in the joint variables, so every transform here reduces to
embedding, multiplying and integrating out blocks of variables.
Conventions: pi(z)g(y) = (2 pi)^{-d/2} e^{i xi.y} g(y - x), z = (x, xi), and
W(f, g)(x, xi) = (2 pi)^{-d} int e^{-i xi.y} f(x + y/2) conj g(x - y/2) dy.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, IllConditionedExponent

LOG_2PI = np.log(2 * np.pi)
ILL_CONDITIONED = 1e-12


def _logdet(A):
    """log det A on the branch continuous from the positive definite case."""
    return complex(np.sum(np.log(np.linalg.eigvals(A))))


@dataclass(frozen=True, eq=False)
class Gaussian:
    """exp(-v^T A v / 2 + b^T v + c) for real v of length n."""

    A: np.ndarray
    b: np.ndarray
    c: complex = 0j

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex)
        b = np.asarray(self.b, dtype=complex).ravel()
        if A.shape != (b.size, b.size):
            raise DimensionError(f"inconsistent shapes {A.shape} and {b.shape}")
        object.__setattr__(self, "A", (A + A.T) / 2)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", complex(self.c))

    @property
    def n(self):
        return self.b.size

    @classmethod
    def constant(cls, n, c=0j):
        return cls(np.zeros((n, n)), np.zeros(n), c)

    @classmethod
    def bilinear(cls, n, i_idx, j_idx, coeff):
        """exp(coeff * v[i_idx] . v[j_idx]) for disjoint index lists."""
        A = np.zeros((n, n), dtype=complex)
        A[i_idx, j_idx] -= coeff
        A[j_idx, i_idx] -= coeff
        return cls(A, np.zeros(n))

    def __mul__(self, other):
        if isinstance(other, Gaussian):
            if other.n != self.n:
                raise DimensionError("cannot multiply Gaussians on different spaces")
            return Gaussian(self.A + other.A, self.b + other.b, self.c + other.c)
        return Gaussian(self.A, self.b, self.c + np.log(complex(other)))

    __rmul__ = __mul__

    def scale_log(self, dc):
        return Gaussian(self.A, self.b, self.c + dc)

    def conj(self):
        return Gaussian(self.A.conj(), self.b.conj(), np.conj(self.c))

    def abs(self):
        """|G| as a Gaussian with real data."""
        return Gaussian(self.A.real, self.b.real, self.c.real)

    def embed(self, index, n):
        """Same function of v[index] inside an n-dimensional variable set."""
        index = np.asarray(index)
        A = np.zeros((n, n), dtype=complex)
        b = np.zeros(n, dtype=complex)
        A[np.ix_(index, index)] = self.A
        b[index] = self.b
        return Gaussian(A, b, self.c)

    def pullback(self, L, shift=None):
        """u -> G(L u + shift)."""
        L = np.asarray(L, dtype=float)
        s = np.zeros(self.n) if shift is None else np.asarray(shift, dtype=float)
        A = L.T @ self.A @ L
        b = L.T @ (self.b - self.A @ s)
        c = self.c - 0.5 * s @ self.A @ s + self.b @ s
        return Gaussian(A, b, c)

    def integrate(self, index):
        """Integrate out the variables in ``index``; the rest keep their order."""
        index = np.atleast_1d(np.asarray(index, dtype=int))
        keep = np.setdiff1d(np.arange(self.n), index)
        Aii = self.A[np.ix_(index, index)]
        ev = np.linalg.eigvalsh(Aii.real)
        if ev.size and ev.min() < ILL_CONDITIONED:
            raise IllConditionedExponent(
                f"real part of the exponent is not safely positive (min eigenvalue {ev.min():.3e})"
            )
        Aki = self.A[np.ix_(keep, index)]
        bi = self.b[index]
        sol_b = np.linalg.solve(Aii, bi)
        sol_A = np.linalg.solve(Aii, Aki.T)
        A = self.A[np.ix_(keep, keep)] - Aki @ sol_A
        b = self.b[keep] - Aki @ sol_b
        m = index.size
        c = self.c + 0.5 * bi @ sol_b + 0.5 * m * LOG_2PI - 0.5 * _logdet(Aii)
        return Gaussian(A, b, c)

    def total(self):
        """Integral over all of R^n."""
        return complex(np.exp(self.integrate(np.arange(self.n)).c))

    def log_eval(self, v):
        v = np.asarray(v, dtype=float)
        quad = np.einsum("...i,ij,...j->...", v, self.A, v)
        return -0.5 * quad + v @ self.b + self.c

    def __call__(self, v):
        return np.exp(self.log_eval(v))

    def argmax_abs(self):
        """A maximizer of |G| over real v (Re A positive semidefinite)."""
        return np.linalg.pinv(self.A.real, rcond=1e-12, hermitian=True) @ self.b.real

    def sup_abs(self):
        """sup over real v of |G(v)|; flat directions are allowed if b is orthogonal to them."""
        m = self.argmax_abs()
        return float(np.exp(self.log_eval(m).real))


@dataclass(frozen=True, eq=False)
class GaussianWindow:
    """g(y) = N exp(-(y - x0)^T W (y - x0)/2 + i xi0.y) with unit L2 norm."""

    W: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.W, dtype=complex))
        W = (W + W.T) / 2
        d = W.shape[0]
        center = np.zeros(2 * d) if self.center is None else np.asarray(self.center, dtype=float)
        if center.shape != (2 * d,):
            raise DimensionError("window center must have length 2d")
        if np.linalg.eigvalsh(W.real).min() <= 0:
            raise ValueError("window width must have positive definite real part")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "center", center)

    @property
    def d(self):
        return self.W.shape[0]

    def gaussian(self):
        d = self.d
        x0, xi0 = self.center[:d], self.center[d:]
        logn = 0.25 * np.linalg.slogdet(self.W.real)[1] - 0.25 * d * np.log(np.pi)
        base = Gaussian(self.W, np.zeros(d), logn).pullback(np.eye(d), -x0)
        return Gaussian(base.A, base.b + 1j * xi0, base.c)

    def __call__(self, y):
        return self.gaussian()(y)


def standard_window(d):
    """Unit-norm Gaussian pi^{-d/4} exp(-|y|^2/2)."""
    return GaussianWindow(np.eye(d), np.zeros(2 * d))


def as_gaussian(f):
    return f.gaussian() if isinstance(f, GaussianWindow) else f


def packet_family(f):
    """(z, y) -> pi(z) f(y) as one Gaussian in 3d variables ordered (x, xi, y)."""
    f = as_gaussian(f)
    d = f.n
    # u = y - x
    L = np.hstack([-np.eye(d), np.zeros((d, d)), np.eye(d)])
    shifted = f.pullback(L)
    phase = Gaussian.bilinear(3 * d, np.arange(d, 2 * d), np.arange(2 * d, 3 * d), 1j)
    return (shifted * phase).scale_log(-0.5 * d * LOG_2PI)


def wave_packet(f, z):
    """pi(z) f as a Gaussian in y."""
    f = as_gaussian(f)
    d = f.n
    z = np.asarray(z, dtype=float)
    fam = packet_family(f)
    # fix the z variables: pull back through y -> (z, y)
    L = np.vstack([np.zeros((2 * d, d)), np.eye(d)])
    return fam.pullback(L, np.r_[z, np.zeros(d)])


def wigner_gaussian(f, g):
    """Cross-Wigner W(f, g) on R^{2d}, variables (x, xi)."""
    f, g = as_gaussian(f), as_gaussian(g)
    d = f.n
    if g.n != d:
        raise DimensionError("windows must share dimension")
    eye, zero = np.eye(d), np.zeros((d, d))
    # variables (X, Xi, y)
    plus = f.pullback(np.hstack([eye, zero, 0.5 * eye]))
    minus = g.conj().pullback(np.hstack([eye, zero, -0.5 * eye]))
    phase = Gaussian.bilinear(3 * d, np.arange(d, 2 * d), np.arange(2 * d, 3 * d), -1j)
    joint = (plus * minus * phase).scale_log(-d * LOG_2PI)
    return joint.integrate(np.arange(2 * d, 3 * d))


def inner(f, g):
    """<f, g> = int f conj(g)."""
    f, g = as_gaussian(f), as_gaussian(g)
    return (f * g.conj()).total()


def stft_gaussian(f, g):
    """V_g f(u) = <f, pi(u) g> as a Gaussian in u = (x, xi)."""
    f, g = as_gaussian(f), as_gaussian(g)
    d = f.n
    fam = packet_family(g).conj()
    joint = fam * f.embed(np.arange(2 * d, 3 * d), 3 * d)
    return joint.integrate(np.arange(2 * d, 3 * d))


def window_transform(window, S):
    """Window whose Wigner distribution is that of ``window`` moved by S.

    W(g')(z) = W(g)(S^{-1} z) up to phase; centre goes to S z0. This is the
    metaplectic image of the window, built without the operator itself.
    """
    d = window.d
    S = np.asarray(S, dtype=float)
    A, B = window.W.real, window.W.imag
    Ai = np.linalg.inv(A)
    G = np.block([[A + B @ Ai @ B, B @ Ai], [Ai @ B, Ai]])
    Si = np.linalg.inv(S)
    Gp = Si.T @ G @ Si
    Gp = (Gp + Gp.T) / 2
    A2 = np.linalg.inv(Gp[d:, d:])
    B2 = A2 @ Gp[d:, :d]
    return GaussianWindow(A2 + 1j * B2, S @ window.center)


def tensor_window(g1, g2):
    """g1 (x) g2 in the ordering (x1, x2, xi1, xi2)."""
    d1, d2 = g1.d, g2.d
    W = np.zeros((d1 + d2, d1 + d2), dtype=complex)
    W[:d1, :d1] = g1.W
    W[d1:, d1:] = g2.W
    c = np.r_[g1.center[:d1], g2.center[:d2], g1.center[d1:], g2.center[d2:]]
    return GaussianWindow(W, c)
