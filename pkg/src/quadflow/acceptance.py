"""Acceptance checks shared by ``quadflow verify`` and the test suite.

Each check returns a :class:`CheckResult`; reference values come from
independent oracles (SVD, quadrature, Hermite-basis diagonalization, closed
forms by substitution) rather than from the code under test.
"""

import cmath
from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import dblquad
from scipy.linalg import expm

from .analysis import analyze
from .form import (
    QuadraticForm,
    builtin,
    custom,
    hamilton_map,
    kfp_form,
    symplectic_J,
)
from .gabor.gaussians import GaussianWindow, stft_gaussian, wave_packet, wigner_gaussian, standard_window
from .gabor.matrix import gabor_matrix, gabor_of_symbol, overlap_kernel
from .gabor.verify import offset_grid, schur_bound, verify_decay
from .matrixcore import pair_opposites, eig, subspace_distance, Subspace
from .mehler import mehler_symbol
from .spectral import decay_exponent, dispersive_singular_values, spectrum, takagi_symplectic

SUITES = ("paper-examples", "oracles", "invariants")
DEFAULT_SEED = 20240607


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class Check:
    name: str
    title: str
    suites: tuple
    run: object


REGISTRY = []


def check(name, title, suites):
    def register(fn):
        REGISTRY.append(Check(name, title, tuple(suites), fn))
        return fn

    return register


def select(suite):
    """Checks belonging to ``suite`` ('all' and 'none' included)."""
    if suite == "none":
        return []
    if suite == "all":
        return list(REGISTRY)
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES + ('all', 'none')}")
    return [c for c in REGISTRY if suite in c.suites]


def run_check(c, seed=DEFAULT_SEED):
    try:
        passed, detail = c.run(np.random.default_rng(seed))
    except Exception as exc:  # a crash is a failure of that check, not of the run
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(c.name, bool(passed), detail)


def run_suite(suite, seed=DEFAULT_SEED):
    return [run_check(c, seed) for c in select(suite)]


# random instances ------------------------------------------------------------


def random_dissipative_form(rng, d):
    """Q with Re Q negative definite and random symmetric Im Q."""
    A = rng.normal(size=(2 * d, 2 * d))
    B = rng.normal(size=(2 * d, 2 * d))
    re = -(A @ A.T) / (2 * d) - 0.2 * np.eye(2 * d)
    return QuadraticForm(re + 1j * (B + B.T) / 2)


def random_symplectic(rng, d, scale=0.5):
    """exp(J H) for a random symmetric H: a real symplectic matrix."""
    H = rng.normal(size=(2 * d, 2 * d)) * scale
    return expm(symplectic_J(d) @ (H + H.T) / 2)


def random_window(rng, d):
    A = rng.normal(size=(d, d))
    B = rng.normal(size=(d, d))
    W = A @ A.T / d + 0.5 * np.eye(d) + 0.5j * (B + B.T) / 2
    return GaussianWindow(W, rng.normal(size=2 * d))


def hermite_oracle_levels(modes=64, count=4):
    """Lowest eigenvalues of x^2 + D^2 in a truncated Hermite-function basis."""
    k = np.sqrt(np.arange(1, modes))
    a = np.diag(k, 1)  # annihilation operator
    X = (a + a.T) / np.sqrt(2)
    P = (a - a.T) / (1j * np.sqrt(2))
    H = X @ X + P @ P
    # the last basis function is polluted by truncation; drop it
    vals = np.linalg.eigvalsh(H[: modes - 1, : modes - 1])
    return np.sort(vals)[:count]


# paper examples ----------------------------------------------------------------


@check("hermite_decay", "Hermite decay rate -d on t in [1, 6]", ["paper-examples"])
def _hermite_decay(rng):
    t = np.linspace(1, 6, 11)
    parts, ok = [], True
    for d in (1, 2):
        rep = verify_decay(builtin("hermite", d=d), t, offsets=np.zeros((0, 2 * d)))
        err = abs(rep.fitted_rate + d) / d
        ok &= err <= 0.05
        parts.append(f"d={d}: slope {rep.fitted_rate:.6f}")
    return ok, "; ".join(parts)


@check("kfp_exponents", "KFP decay exponents by substitution", ["paper-examples"])
def _kfp_exponents(rng):
    worst = 0.0
    for a in (-2.0, -1.0, -0.5, 0.1, 1.0):
        exact = math.sqrt(1 - 4 * a) / 2 if a < 0 else 0.5
        mu = decay_exponent(takagi_symplectic(kfp_form(a).Q))
        worst = max(worst, abs(mu - exact))
    return worst <= 1e-9, f"max |mu - formula| = {worst:.2e}"


@check("twisted_split", "Twisted Laplacian singular space, complement and mu'", ["paper-examples"])
def _twisted(rng):
    parts, ok = [], True
    for d in (1, 2):
        a = analyze(builtin("twisted", d=d))
        J = symplectic_J(d)
        eye = np.eye(2 * d)
        exact_S = Subspace.span(np.vstack([eye, J / 2]))
        exact_C = Subspace.span(np.vstack([eye, -J / 2]))
        dist_S = subspace_distance(a.singular.basis, exact_S)
        dist_C = subspace_distance(a.singular.complement, exact_C)
        good = (
            a.singular.dim == 2 * d
            and a.singular.is_symplectic
            and dist_S < 1e-9
            and dist_C < 1e-9
            and a.mu_prime is not None
            and abs(a.mu_prime - d) < 1e-9
        )
        ok &= good
        parts.append(f"d={d}: dim {a.singular.dim}, dist {dist_S:.1e}/{dist_C:.1e}, mu' {a.mu_prime:.12g}")
    return ok, "; ".join(parts)


@check("mixed_dispersion", "Mixed model dispersive singular values t + sqrt(1 + t^2)", ["paper-examples", "oracles"])
def _mixed_dispersion(rng):
    a = analyze(builtin("mixed", d1=1, d2=1))
    worst = 0.0
    for t in (0.5, 1.0, 2.0, 5.0):
        sv = dispersive_singular_values(a.split.F2, t)[0]
        oracle = np.linalg.svd(np.array([[1.0, 2 * t], [0.0, 1.0]]), compute_uv=False)[0]
        worst = max(worst, abs(sv - oracle), abs(sv - (t + math.sqrt(1 + t * t))))
    return worst <= 1e-9, f"max deviation {worst:.2e}"


# oracles -----------------------------------------------------------------------


@check("takagi_residuals", "Symplectic Takagi residuals on the named models", ["oracles"])
def _takagi(rng):
    forms = {f"kfp({a})": kfp_form(a) for a in (-2.0, -1.0, -0.5, 1.0)}
    forms["hermite(1)"] = builtin("hermite", d=1).form
    forms["hermite(2)"] = builtin("hermite", d=2).form
    forms["mixed q1"] = analyze(builtin("mixed", d1=1, d2=1)).split.q1
    ok, worst = True, 0.0
    for name, f in forms.items():
        tf = takagi_symplectic(f.Q)
        d = tf.d
        J = symplectic_J(d)
        sym = np.linalg.norm(tf.P.T @ J @ tf.P - J, 2)
        diag = np.linalg.norm(tf.P.T @ f.Q @ tf.P - tf.D, 2)
        good = sym <= 1e-8 and diag <= 1e-8 * np.linalg.norm(f.Q, 2)
        ok &= good
        worst = max(worst, sym, diag)
    return ok, f"{len(forms)} forms, worst residual {worst:.1e}"


@check("mehler_closed_form", "Hermite Mehler symbol vs 1/cosh t and -tanh t", ["oracles", "paper-examples"])
def _mehler(rng):
    F = hamilton_map(builtin("hermite", d=1).form)
    worst = 0.0
    for t in rng.uniform(0, 10, 100):
        t = max(float(t), 1e-6)
        sym = mehler_symbol(F, t)
        worst = max(
            worst,
            abs(np.exp(sym.log_prefactor) - 1 / math.cosh(t)) * math.cosh(t),
            np.abs(sym.exponent + math.tanh(t) * np.eye(2)).max(),
        )
    return worst <= 1e-10, f"max error {worst:.2e} over 100 times"


def quadrature_symbol_transform(G, sym, u, v):
    """V_G Theta(u, v) = (2 pi)^{-1} int Theta(s) conj G(s - u) e^{-i v.s} ds by adaptive quadrature (d = 1)."""
    M = np.asarray(sym.exponent, dtype=complex)
    Ac, bc, cc = G.A.conj(), G.b.conj(), np.conj(G.c)
    lp = sym.log_prefactor
    u0, u1 = float(u[0]), float(u[1])
    v0, v1 = float(v[0]), float(v[1])
    m00, m01, m11 = complex(M[0, 0]), complex(M[0, 1] + M[1, 0]), complex(M[1, 1])
    a00, a01, a11 = complex(Ac[0, 0]), complex(Ac[0, 1]), complex(Ac[1, 1])
    b0, b1 = complex(bc[0]), complex(bc[1])

    def value(s1, s2):
        r1, r2 = s1 - u0, s2 - u1
        theta = lp + m00 * s1 * s1 + m01 * s1 * s2 + m11 * s2 * s2
        window = cc - 0.5 * (a00 * r1 * r1 + 2 * a01 * r1 * r2 + a11 * r2 * r2) + b0 * r1 + b1 * r2
        return cmath.exp(theta + window - 1j * (v0 * s1 + v1 * s2)) / (2 * math.pi)

    # integrate over a box where |Theta(s) G(s - u)| is non-negligible
    env = np.real(-2 * M) + Ac.real
    cov = np.linalg.inv(env)
    centre = cov @ (Ac.real @ np.asarray(u, float) + bc.real)
    half = 10 * np.sqrt(np.diag(cov))
    lo, hi = centre - half, centre + half
    peak = abs(value(*centre))
    tol = 1e-11 * peak * float(np.prod(half))
    opts = dict(epsabs=tol, epsrel=1e-10)
    re = dblquad(lambda y, x: value(x, y).real, lo[0], hi[0], lo[1], hi[1], **opts)[0]
    im = dblquad(lambda y, x: value(x, y).imag, lo[0], hi[0], lo[1], hi[1], **opts)[0]
    return re + 1j * im


def oracle_models(rng):
    return {
        "hermite(1)": builtin("hermite", d=1).form,
        "-(x^2 + 2i xi^2)": custom(np.diag([-1.0, 0.0]), np.diag([0.0, -2.0])).form,
        "random": random_dissipative_form(rng, 1),
    }


@check("oracle_equivalence", "Closed-form V_G Theta vs adaptive quadrature, 50 samples per model", ["oracles"])
def _oracle(rng, samples=50):
    g = standard_window(1)
    worst, parts = 0.0, []
    for name, f in oracle_models(rng).items():
        F = hamilton_map(f)
        err = 0.0
        for _ in range(samples):
            t = rng.uniform(0.1, 2.0)
            gamma = random_window(rng, 1)
            G = wigner_gaussian(gamma, g)
            sym = mehler_symbol(F, t)
            u, v = rng.uniform(-1.5, 1.5, 2), rng.uniform(-1.5, 1.5, 2)
            closed = gabor_of_symbol(G, sym, u, v)
            quad = quadrature_symbol_transform(G, sym, u, v)
            err = max(err, abs(closed - quad) / abs(quad))
        parts.append(f"{name}: {err:.1e}")
        worst = max(worst, err)
    return worst < 1e-6, "max rel err " + ", ".join(parts)


@check("spectrum_lattice", "Hermite spectrum head vs 64-mode Hermite-basis diagonalization", ["oracles", "paper-examples"])
def _spectrum(rng):
    lat = spectrum(takagi_symplectic(builtin("hermite", d=1).form.Q), 7.0)
    head = np.sort(lat.points.real)[::-1][:4]
    oracle = -hermite_oracle_levels(64, 4)
    err = float(np.abs(head - oracle).max())
    exact = float(np.abs(head - np.array([-1.0, -3.0, -5.0, -7.0])).max())
    return err < 1e-6 and exact < 1e-9, f"head {np.round(head, 12).tolist()}, oracle error {err:.1e}"


# invariants --------------------------------------------------------------------


@check("offdiag_decay", "Off-diagonal sup statistics stable under refinement", ["invariants"])
def _offdiag(rng):
    model = builtin("hermite", d=1)
    coarse = verify_decay(model, [1.0], offsets=offset_grid(8.0, 0.5, 1), t_offdiag=1.0)
    fine = verify_decay(model, [1.0], offsets=offset_grid(8.0, 0.25, 1), t_offdiag=1.0)
    ok, parts = True, []
    for N in (1, 2, 3, 4):
        a, b = coarse.sup_stats[N], fine.sup_stats[N]
        good = math.isfinite(a) and math.isfinite(b) and a > 0 and 0.5 < b / a < 2
        ok &= good
        parts.append(f"N={N}: {a:.6g} -> {b:.6g}")
    return ok, "; ".join(parts)


SCHUR_TIMES = (0.5, 1.0, 2.0)


@check("schur_bound", "Schur integrals track e^{-t mu'} (det Sigma)^{1/2} with one constant", ["invariants", "paper-examples"])
def _schur(rng):
    ok, parts = True, []
    for name, params in (("hermite", {"d": 1}), ("mixed", {"d1": 1, "d2": 1})):
        model = builtin(name, **params)
        est = [schur_bound(model, t) for t in SCHUR_TIMES]
        ratios = np.array([e.ratio for e in est])
        C = ratios.max()
        closed = max(abs(e.row - e.row_closed) / e.row_closed + abs(e.col - e.col_closed) / e.col_closed for e in est)
        bounded = all(max(e.row, e.col) <= C * e.reference * (1 + 1e-12) for e in est)
        spread = ratios.max() / ratios.min()
        ok &= bool(bounded and spread < 2 and closed < 1e-3)
        parts.append(f"{name}: C {C:.6g}, spread {spread:.4f}")
    return ok, "; ".join(parts)


def _invariance_instances(rng, count):
    for i in range(count):
        yield random_dissipative_form(rng, 1 + i % 2)


def pairing_ok(f, tol=1e-8):
    vals = eig(hamilton_map(f)).eigenvalues
    _, residual = pair_opposites(vals)
    return residual <= tol * max(1.0, np.abs(vals).max())


def conjugation_gap(f, S):
    """|mu(q) - mu(q o S)| for a real symplectic S."""
    mu = decay_exponent(takagi_symplectic(f.Q))
    mu_s = decay_exponent(takagi_symplectic(S.T @ f.Q @ S))
    return abs(mu - mu_s) / max(1.0, mu)


def t0_gap(f, w, z, g=None, gamma=None):
    d = f.d
    K = abs(gabor_matrix(f, 0.0, z, w, g, gamma))
    ref = abs(overlap_kernel(g, gamma, d)(w, z))
    return abs(K - ref)


def covariance_gap(g, gamma, z, w, u):
    """| |V_{pi(z)g} pi(w)gamma(u)| - (2 pi)^{-d} |V_g gamma(u - w + z)| |, relative."""
    d = g.d
    lhs = abs(stft_gaussian(wave_packet(gamma, w), wave_packet(g, z))(u))
    rhs = (2 * np.pi) ** (-d) * abs(stft_gaussian(gamma, g)(u - w + z))
    return abs(lhs - rhs) / max(rhs, 1e-300)


@check("invariance", "Pairing, conjugation invariance of mu, t = 0 identity, covariance (100 instances each)", ["invariants"])
def _invariance(rng, count=100):
    pair_bad = conj_worst = t0_worst = cov_worst = 0.0
    for f in _invariance_instances(rng, count):
        pair_bad += not pairing_ok(f)
        conj_worst = max(conj_worst, conjugation_gap(f, random_symplectic(rng, f.d)))
    for i in range(count):
        d = 1 + i % 2
        f = random_dissipative_form(rng, d)
        g, gamma = random_window(rng, d), random_window(rng, d)
        w, z = rng.normal(size=2 * d), rng.normal(size=2 * d)
        t0_worst = max(t0_worst, t0_gap(f, w, z, g, gamma))
        u = rng.normal(size=2 * d)
        cov_worst = max(cov_worst, covariance_gap(g, gamma, z, w, u))
    ok = pair_bad == 0 and conj_worst < 1e-8 and t0_worst < 1e-10 and cov_worst < 1e-8
    detail = (
        f"pairing failures {int(pair_bad)}, mu conjugation gap {conj_worst:.1e}, "
        f"t=0 gap {t0_worst:.1e}, covariance gap {cov_worst:.1e}"
    )
    return ok, detail
