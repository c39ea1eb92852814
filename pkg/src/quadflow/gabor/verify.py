"""Sampled checks of the Gabor-matrix decay and the Schur operator bounds."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os

import numpy as np
from scipy.special import erfc

from ..analysis import METAPLECTIC, NONSYMPLECTIC, SPLIT, TRIVIAL, analyze
from ..errors import GridTooCoarse
from ..mehler import tail_slope
from .matrix import kernel, split_kernel

DEFAULT_BOX = 6.0
DEFAULT_STEP = 0.25
TAIL_LIMIT = 0.01
SPREAD_SDS = 8.0


def max_workers():
    """Thread cap from QUADFLOW_THREADS (default: CPU count, at most 8)."""
    raw = os.environ.get("QUADFLOW_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


def parallel_map(fn, items, workers=None):
    """Ordered map over ``items`` using a thread pool."""
    items = list(items)
    workers = max_workers() if workers is None else max(1, workers)
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def fractional_exponent(mu, nu, t):
    """exp(-t mu^nu), the decay factor of the subordinated semigroup, 0 < nu < 1."""
    if not 0 < nu < 1:
        raise ValueError(f"nu must lie in (0, 1), got {nu!r}")
    if mu < 0 or t < 0:
        raise ValueError("mu and t must be nonnegative")
    return math.exp(-t * mu**nu)


class _Evaluator:
    """|K| and the theoretical envelope at one time, for any regime."""

    def __init__(self, a, t, windows=None):
        self.t = float(t)
        self.a = a
        if a.regime == SPLIT:
            self.split = split_kernel(a, t, windows)
            self.full = None
            self.log_det = self.split.log_det_sigma()
        else:
            g, gamma = windows if windows is not None else (None, None)
            self.split = None
            self.full = kernel(a, t, g, gamma)
            self.log_det = 0.0
        self.rate = a.mu_prime if a.mu_prime is not None else 0.0

    def magnitude(self, w, z):
        if self.split is not None:
            return self.split.magnitude(w, z)
        return self.full.magnitude(w, z)

    def envelope(self, w, z, N):
        if self.split is not None:
            return self.split.envelope(w, z, N)
        dist = np.linalg.norm(np.asarray(w) - np.asarray(z), axis=-1)
        return np.exp(-self.t * self.rate) * (1 + dist) ** (-2.0 * N)


@dataclass(frozen=True, eq=False)
class GaborReport:
    """Diagonal sweep, off-diagonal sup statistics and optional Schur data."""

    model: str
    regime: str
    t_grid: np.ndarray
    diagonal: np.ndarray
    diagonal_envelope: np.ndarray
    log_det_sigma: np.ndarray
    fitted_rate: float
    expected_rate: float
    t_offdiag: float
    offsets: np.ndarray
    offdiag: np.ndarray
    N_list: tuple
    sup_stats: dict
    schur: tuple = ()
    fractional: dict = field(default_factory=dict)

    @property
    def rate_error(self):
        """Relative deviation of the fitted rate from the expected one."""
        if not np.isfinite(self.fitted_rate) or self.expected_rate is None:
            return float("nan")
        return abs(self.fitted_rate - self.expected_rate) / max(abs(self.expected_rate), 1e-300)

    def rate_ok(self, tol=0.05):
        if len(self.t_grid) < 2:
            return True
        if self.expected_rate == 0:
            return abs(self.fitted_rate) <= tol
        return bool(self.rate_error <= tol)

    def diagonal_rows(self):
        """(t, |w - z|, |K|, envelope, ratio) rows of the diagonal sweep."""
        return [
            (float(t), 0.0, float(k), float(e), float(k / e) if e > 0 else math.inf)
            for t, k, e in zip(self.t_grid, self.diagonal, self.diagonal_envelope)
        ]

    def offdiag_rows(self, N):
        """Off-diagonal rows for one N, sorted by distance."""
        dist = np.linalg.norm(self.offsets, axis=-1)
        order = np.argsort(dist, kind="stable")
        decay = math.exp(self.t_offdiag * self.expected_rate) if self.expected_rate else 1.0
        rows = []
        for i in order:
            e = decay * (1 + dist[i]) ** (-2.0 * N)
            k = self.offdiag[i]
            rows.append((self.t_offdiag, float(dist[i]), float(k), float(e), float(k / e)))
        return rows


def offset_grid(radius=8.0, step=0.5, d=1):
    """Offsets on a cubic lattice of spacing ``step`` inside the ball of ``radius``."""
    ticks = np.arange(-radius, radius + step / 2, step)
    mesh = np.stack(np.meshgrid(*([ticks] * (2 * d)), indexing="ij"), axis=-1).reshape(-1, 2 * d)
    return mesh[np.linalg.norm(mesh, axis=1) <= radius + 1e-12]


def verify_decay(model, t_grid, offsets=None, N_list=(1, 2, 3, 4), windows=None, t_offdiag=None, workers=None):
    """Fit the time decay on the diagonal and measure off-diagonal decay.

    The diagonal sweep evaluates |K(0, 0; t)| and fits the slope of
    log|K| (plus (1/2) log det Sigma_t in the split case) over the tail half
    of ``t_grid``; it should match -mu'. The off-diagonal sweep at
    ``t_offdiag`` (default: middle of the grid, or 1) reports
    sup |K(delta, 0)| (1 + |delta|)^{2N} e^{t mu'} for each N.
    """
    a = analyze(model)
    d = a.d
    t_grid = np.asarray(t_grid, dtype=float).ravel()
    expected = None if a.mu_prime is None else -a.mu_prime
    if a.regime == NONSYMPLECTIC:
        expected = None if a.mu is None else -a.mu
    zero = np.zeros(2 * d)

    def diag_at(t):
        ev = _Evaluator(a, t, windows)
        return float(ev.magnitude(zero, zero)), float(ev.envelope(zero, zero, N_list[0] if N_list else 0)), ev.log_det

    results = parallel_map(diag_at, t_grid, workers)
    diag = np.array([r[0] for r in results])
    env = np.array([r[1] for r in results])
    logdet = np.array([r[2] for r in results])
    if len(t_grid) >= 2:
        fitted = tail_slope(t_grid, np.log(diag) + 0.5 * logdet)
    else:
        fitted = float("nan")

    if offsets is None:
        offsets = offset_grid(8.0, 0.5, d) if d == 1 else offset_grid(8.0, 2.0, d)
    offsets = np.asarray(offsets, dtype=float).reshape(-1, 2 * d)
    if t_offdiag is None:
        t_offdiag = float(np.median(t_grid)) if len(t_grid) else 1.0
    rate = 0.0 if expected is None else -expected
    if len(offsets) and len(t_grid):
        ev = _Evaluator(a, t_offdiag, windows)
        off = np.asarray(ev.magnitude(offsets, np.broadcast_to(zero, offsets.shape)))
    else:
        off = np.zeros(len(offsets))
    dist = np.linalg.norm(offsets, axis=-1)
    stats = {}
    for N in N_list:
        vals = off * (1 + dist) ** (2 * N) * math.exp(t_offdiag * rate)
        stats[int(N)] = float(vals.max()) if vals.size else 0.0
    return GaborReport(
        model=a.label,
        regime=a.regime,
        t_grid=t_grid,
        diagonal=diag,
        diagonal_envelope=env,
        log_det_sigma=logdet,
        fitted_rate=fitted,
        expected_rate=expected,
        t_offdiag=float(t_offdiag),
        offsets=offsets,
        offdiag=off,
        N_list=tuple(int(n) for n in N_list),
        sup_stats=stats,
    )


@dataclass(frozen=True)
class SchurEstimate:
    """Row and column Schur integrals at one time.

    ``row`` is sup_z int |K(w, z)| dw and ``col`` is sup_w int |K(w, z)| dz,
    both from grid quadrature; the ``*_closed`` values come from the
    Gaussian closed form. ``reference`` is e^{-t mu'} (det Sigma_t)^{1/2}.
    """

    t: float
    row: float
    col: float
    row_closed: float
    col_closed: float
    tail: float
    reference: float

    @property
    def ratio(self):
        return max(self.row, self.col) / self.reference


def _grid_integral(gauss_abs, fixed_idx, free_idx, box, step, z_samples, adaptive=True):
    """sup over sampled fixed values of the grid integral over the free variables.

    The grid is centred at the peak of the free variables for each sample.
    Each free axis spans at least SPREAD_SDS standard deviations; when that
    exceeds ``box`` the axis is stretched and its step scaled by the same
    factor, so the point count stays fixed. Returns (sup, worst tail fraction).
    """
    m = len(free_idx)
    R = gauss_abs.A.real
    Rff = R[np.ix_(free_idx, free_idx)]
    Rfx = R[np.ix_(free_idx, fixed_idx)]
    beta_f = gauss_abs.b.real[free_idx]
    cov = np.linalg.inv(Rff)
    sd = np.sqrt(np.diag(cov))
    stretch = np.maximum(1.0, SPREAD_SDS * sd / box) if adaptive else np.ones(m)
    base = np.arange(-box, box + step / 2, step)
    axes = [base * s for s in stretch]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m)
    cell = float(np.prod(step * stretch))
    half_width = (box + step / 2) * stretch
    tail = float(np.sum(erfc(half_width / (np.sqrt(2) * sd))))
    best = 0.0
    n = gauss_abs.n
    for zk in z_samples:
        centre = cov @ (beta_f - Rfx @ zk)
        pts = np.empty((len(mesh), n))
        pts[:, free_idx] = mesh + centre
        pts[:, fixed_idx] = zk
        vals = np.exp(gauss_abs.log_eval(pts).real)
        best = max(best, vals.sum() * cell)
    return best, tail


def _factor_integrals(k, box, step, samples, adaptive=True):
    """(row, col, row_closed, col_closed, tail) for a kernel on (w, z) in R^{2m} x R^{2m}."""
    G = k.gaussian.abs()
    half = G.n // 2
    w_idx = np.arange(half)
    z_idx = np.arange(half, 2 * half)
    row_closed_g = G.integrate(w_idx)
    col_closed_g = G.integrate(z_idx)
    row_closed = row_closed_g.sup_abs()
    col_closed = col_closed_g.sup_abs()

    zs = [row_closed_g.argmax_abs() + s for s in np.vstack([np.zeros(half), samples])]
    ws = [col_closed_g.argmax_abs() + s for s in np.vstack([np.zeros(half), samples])]
    row, tail_r = _grid_integral(G, z_idx, w_idx, box, step, zs, adaptive)
    col, tail_c = _grid_integral(G, w_idx, z_idx, box, step, ws, adaptive)
    return row, col, row_closed, col_closed, max(tail_r, tail_c)


def _sample_offsets(m, spread=2.0, count=3):
    ticks = np.linspace(-spread, spread, count)
    return np.stack(np.meshgrid(*([ticks] * m), indexing="ij"), axis=-1).reshape(-1, m)


def schur_bound(model, t, box=DEFAULT_BOX, step=DEFAULT_STEP, windows=None, adaptive=True):
    """Row/column Schur integrals of |K| at time t.

    For split models |K| factorizes in split coordinates and chi has unit
    determinant, so the integrals are products of the factor integrals.
    The free variables are integrated on a grid [-box, box]^m of spacing
    ``step`` centred at the Gaussian peak, stretched along axes where the
    Gaussian is wider than box / SPREAD_SDS (unless ``adaptive`` is False); GridTooCoarse is raised when the
    Gaussian tail outside the box exceeds 1% of the integral.
    """
    a = analyze(model)
    t = float(t)
    if a.regime == SPLIT:
        sk = split_kernel(a, t, windows)
        parts = [sk.k1, sk.k2]
        reference = math.exp(-t * a.mu_prime) * math.exp(0.5 * sk.log_det_sigma())
    else:
        g, gamma = windows if windows is not None else (None, None)
        parts = [kernel(a, t, g, gamma)]
        rate = a.mu_prime if a.regime in (TRIVIAL, METAPLECTIC) and a.mu_prime is not None else 0.0
        reference = math.exp(-t * rate)
    row = col = row_c = col_c = 1.0
    tail = 0.0
    for k in parts:
        m = k.gaussian.n // 2
        r, c, rc, cc, tl = _factor_integrals(k, box, step, _sample_offsets(m), adaptive)
        row, col, row_c, col_c = row * r, col * c, row_c * rc, col_c * cc
        tail = max(tail, tl)
    if tail > TAIL_LIMIT:
        raise GridTooCoarse(f"Gaussian tail outside the box is {tail:.2%} of the integral")
    return SchurEstimate(t, row, col, row_c, col_c, tail, reference)
