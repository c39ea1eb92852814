"""Gabor matrix K(w, z) = <e^{tq^w} pi(z) g, pi(w) gamma> of a quadratic semigroup.

Two independent closed forms are provided:

* the symbol route, |K(w, z)| = |V_G Theta_t((w + z)/2, J(w - z))| with
  G = W(gamma, g), which determines K up to a unimodular phase;
* the direct route, K(w, z) = int Theta_t conj W(pi(w) gamma, pi(z) g),
  which keeps the exact phase and is used for compositions.

Both produce a Gaussian in the joint variables (w, z), so grids of values
are a single vectorized evaluation.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..analysis import SPLIT, TRIVIAL, analyze
from ..errors import NonSymplecticSingularSpace, QuadflowError
from ..form import symplectic_J
from ..mehler import MehlerSymbol, mehler_symbol
from ..spectral import dispersive_flow, euler_decomposition
from .gaussians import (
    LOG_2PI,
    Gaussian,
    as_gaussian,
    packet_family,
    standard_window,
    wigner_gaussian,
    window_transform,
)

# The propagator exp(i t q2^w) moves wave packets along exp(FLOW_SIGN * 2t Im F2).
FLOW_SIGN = -1.0


def symbol_gaussian(sym):
    """Theta_t as a Gaussian in z."""
    n = sym.dim
    return Gaussian(-2 * sym.exponent, np.zeros(n), sym.log_prefactor)


def symbol_transform(G, sym):
    """V_G Theta(u, v) = <Theta, pi(u, v) G> as a Gaussian in (u, v)."""
    G = as_gaussian(G)
    n = G.n
    fam = packet_family(G).conj()
    theta = symbol_gaussian(sym).embed(np.arange(2 * n, 3 * n), 3 * n)
    return (fam * theta).integrate(np.arange(2 * n, 3 * n))


def gabor_of_symbol(G, sym, u, v):
    """V_G Theta_t(u, v) in closed form (vectorized over leading axes of u, v)."""
    V = symbol_transform(G, sym)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return V(np.concatenate([u, v], axis=-1))


@dataclass(frozen=True, eq=False)
class GaborKernel:
    """K(w, z) as a Gaussian in the concatenated variables (w, z)."""

    gaussian: Gaussian
    route: str

    @property
    def d(self):
        return self.gaussian.n // 4

    def _stack(self, w, z):
        w, z = np.broadcast_arrays(np.asarray(w, dtype=float), np.asarray(z, dtype=float))
        return np.concatenate([w, z], axis=-1)

    def __call__(self, w, z):
        return self.gaussian(self._stack(w, z))

    def magnitude(self, w, z):
        return np.exp(self.gaussian.log_eval(self._stack(w, z)).real)

    def log_magnitude(self, w, z):
        return self.gaussian.log_eval(self._stack(w, z)).real


def _symbol_change(d):
    """Matrix of (w, z) -> ((w + z)/2, J(w - z))."""
    I = np.eye(2 * d)
    J = symplectic_J(d)
    return np.block([[I / 2, I / 2], [J, -J]])


def symbol_kernel(sym, g=None, gamma=None):
    """|K| through the Gabor transform of the symbol (phase not meaningful)."""
    d = sym.dim // 2
    g = standard_window(d) if g is None else g
    gamma = standard_window(d) if gamma is None else gamma
    G = wigner_gaussian(gamma, g)
    V = symbol_transform(G, sym)
    return GaborKernel(V.pullback(_symbol_change(d)), "symbol")


def direct_kernel(sym, g=None, gamma=None):
    """K(w, z) = int Theta conj W(pi(w) gamma, pi(z) g), exact phase."""
    d = sym.dim // 2
    g = as_gaussian(standard_window(d) if g is None else g)
    gamma = as_gaussian(standard_window(d) if gamma is None else gamma)
    # variables: w (2d), z (2d), X (d), Xi (d), y (d)
    n = 7 * d
    w_idx = np.arange(0, 2 * d)
    z_idx = np.arange(2 * d, 4 * d)
    X = np.arange(4 * d, 5 * d)
    Xi = np.arange(5 * d, 6 * d)
    y = np.arange(6 * d, 7 * d)

    def packet_at(window, sel, sign):
        # pi(sel) window evaluated at X + sign*y/2, as a function of all n variables
        fam = packet_family(window)  # variables (x, xi, arg)
        L = np.zeros((3 * d, n))
        L[: 2 * d, sel] = np.eye(2 * d)
        L[2 * d :, X] = np.eye(d)
        L[2 * d :, y] = sign * 0.5 * np.eye(d)
        return fam.pullback(L)

    left = packet_at(gamma, w_idx, +1).conj()
    right = packet_at(g, z_idx, -1)
    phase = Gaussian.bilinear(n, Xi, y, 1j)
    joint = (left * right * phase).scale_log(-d * LOG_2PI)
    wig = joint.integrate(y)
    theta = symbol_gaussian(sym).embed(np.arange(4 * d, 6 * d), 6 * d)
    return GaborKernel((wig * theta).integrate(np.arange(4 * d, 6 * d)), "direct")


def overlap_kernel(g=None, gamma=None, d=None):
    """<pi(z) g, pi(w) gamma> by a single integral over y."""
    if d is None:
        d = (g or gamma).d
    g = as_gaussian(standard_window(d) if g is None else g)
    gamma = as_gaussian(standard_window(d) if gamma is None else gamma)
    n = 5 * d
    fam_g = packet_family(g)
    fam_c = packet_family(gamma).conj()
    Lz = np.zeros((3 * d, n))
    Lz[: 2 * d, 2 * d : 4 * d] = np.eye(2 * d)
    Lz[2 * d :, 4 * d :] = np.eye(d)
    Lw = np.zeros((3 * d, n))
    Lw[: 2 * d, : 2 * d] = np.eye(2 * d)
    Lw[2 * d :, 4 * d :] = np.eye(d)
    joint = fam_g.pullback(Lz) * fam_c.pullback(Lw)
    return GaborKernel(joint.integrate(np.arange(4 * d, 5 * d)), "overlap")


def identity_symbol(d):
    return MehlerSymbol(0.0, 0j, np.zeros((2 * d, 2 * d), dtype=complex))


@lru_cache(maxsize=256)
def _cached_symbol(key, t):
    return mehler_symbol(np.array(key[1]).reshape(key[0], key[0]), t)


def symbol_at(analysis, t):
    F = analysis.F
    key = (F.shape[0], tuple(F.ravel().tolist()))
    return _cached_symbol(key, float(t))


def kernel(model, t, g=None, gamma=None, route="symbol"):
    """Gabor kernel of exp(t q^w) for the full form of ``model``."""
    a = analyze(model)
    sym = symbol_at(a, t)
    build = symbol_kernel if route == "symbol" else direct_kernel
    return build(sym, g, gamma)


def gabor_matrix(model, t, z, w, g=None, gamma=None):
    """K(w, z; t) = prefactor * V_G theta_t((w + z)/2, J(w - z)).

    The modulus is exact; the phase is that of the symbol route and drops
    the unimodular factor relating it to the inner product.
    """
    return complex(kernel(model, t, g, gamma)(np.asarray(w, float), np.asarray(z, float)))


@dataclass(frozen=True, eq=False)
class SplitKernel:
    """|K| = |K1(w~', z~')| |K2(w~'', z~'')| in split coordinates z~ = chi^{-1} z."""

    chi: np.ndarray
    d1: int
    n: int
    t: float
    mu_prime: float
    k1: GaborKernel
    k2: GaborKernel
    flow: np.ndarray
    euler: object

    def split(self, z):
        z = np.asarray(z, dtype=float)
        zt = np.linalg.solve(self.chi, z.reshape(-1, z.shape[-1]).T).T.reshape(z.shape)
        d1, n = self.d1, self.n
        dd = d1 + n
        prime = np.concatenate([zt[..., :d1], zt[..., dd : dd + d1]], axis=-1)
        second = np.concatenate([zt[..., d1:dd], zt[..., dd + d1 :]], axis=-1)
        return prime, second

    def factors(self, w, z):
        wp, ws = self.split(w)
        zp, zs = self.split(z)
        return self.k1.magnitude(wp, zp), self.k2.magnitude(ws, zs)

    def magnitude(self, w, z):
        a, b = self.factors(w, z)
        return a * b

    def log_det_sigma(self):
        return float(np.sum(np.log(self.euler.Sigma)))

    def envelope(self, w, z, N, M=None):
        """e^{-t mu'} (det Sigma)^{-1/2} <w~' - z~'>^{-2N} <D U (w~'' - Phi z~'')>^{-M}."""
        M = 2 * N if M is None else M
        wp, ws = self.split(w)
        zp, zs = self.split(z)
        first = (1 + np.linalg.norm(wp - zp, axis=-1)) ** (-2.0 * N)
        second = _dispersive_envelope(self.flow, self.euler, ws, zs, M)
        return np.exp(-self.t * self.mu_prime) * first * second


def _dispersive_envelope(flow, euler, w, z, N):
    n = flow.shape[0] // 2
    D = np.concatenate([1 / euler.Sigma, np.ones(n)])
    diff = np.asarray(w) - np.asarray(z) @ flow.T
    v = (diff @ euler.U.T) * D
    return np.exp(-0.5 * np.sum(np.log(euler.Sigma))) * (1 + np.linalg.norm(v, axis=-1)) ** (-float(N))


def dispersive_flow_matrix(F2, t):
    """Phase-space flow of exp(i t q2^w)."""
    return dispersive_flow(F2, FLOW_SIGN * t)


def metaplectic_envelope(q2, t, z, w, N):
    """(det Sigma_t)^{-1/2} (1 + |D_t U_t (w - H_t z)|)^{-N} for the flow of q2."""
    q2 = np.asarray(q2, dtype=float)
    n = q2.shape[0] // 2
    F2 = 1j * symplectic_J(n) @ q2
    H = dispersive_flow_matrix(F2, t)
    return float(_dispersive_envelope(H, euler_decomposition(H), np.asarray(w), np.asarray(z), N))


def dispersive_kernel(F2, t, g=None, gamma=None):
    """|<e^{itq2^w} pi(z) g, pi(w) gamma>| via the transported window."""
    n = F2.shape[0] // 2
    g = standard_window(n) if g is None else g
    gamma = standard_window(n) if gamma is None else gamma
    H = dispersive_flow_matrix(F2, t)
    g_t = window_transform(g, H)
    base = overlap_kernel(g_t, gamma)
    L = np.block([[np.eye(2 * n), np.zeros((2 * n, 2 * n))], [np.zeros((2 * n, 2 * n)), H]])
    return GaborKernel(base.gaussian.pullback(L), "dispersive"), H


def split_kernel(model, t, windows=None):
    """Factorized Gabor kernel for a model with proper symplectic singular space.

    ``windows`` optionally gives ((g1, gamma1), (g2, gamma2)) in split
    coordinates; the corresponding windows in original coordinates are the
    transports of g1 (x) g2 by chi (see :func:`split_windows`).
    """
    a = analyze(model)
    if a.regime == TRIVIAL:
        raise QuadflowError("singular space is trivial; use the unsplit kernel")
    if a.regime != SPLIT or a.split is None:
        raise NonSymplecticSingularSpace(f"no symplectic split available (regime {a.regime})")
    sp = a.split
    if a.mu_prime is None:
        raise QuadflowError("dissipative part has no decay exponent: " + a.errors.get("takagi", ""))
    (g1, c1), (g2, c2) = windows if windows is not None else ((None, None), (None, None))
    sym1 = mehler_symbol(sp.F1, t)
    k1 = symbol_kernel(sym1, g1, c1)
    k2, H = dispersive_kernel(sp.F2, t, g2, c2)
    return SplitKernel(sp.chi, sp.q1.d, sp.n, float(t), a.mu_prime, k1, k2, H, euler_decomposition(H))


def split_windows(model, g1=None, g2=None):
    """Window in original coordinates matching g1 (x) g2 in split coordinates."""
    from .gaussians import tensor_window

    a = analyze(model)
    sp = a.split
    g1 = standard_window(sp.q1.d) if g1 is None else g1
    g2 = standard_window(sp.n) if g2 is None else g2
    return window_transform(tensor_window(g1, g2), sp.chi)


def gabor_matrix_split(model, t, z, w, windows=None, N=1, M=None):
    """(|K(w, z; t)|, envelope) through the split q = q1 + i q2."""
    sk = split_kernel(model, t, windows)
    mag = float(sk.magnitude(np.asarray(w, float), np.asarray(z, float)))
    env = float(sk.envelope(np.asarray(w, float), np.asarray(z, float), N, M))
    return mag, env
