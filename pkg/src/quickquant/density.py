"""Limit density f_t and distribution F_t of J(t).

The producer is the mixture Monte Carlo estimator: each replicate draws a
pivot pair (l3, r3), a rescaled tail Y = (r3-l3)(1 + J') from a fresh
interval path, and adds the closed-form conditional density evaluated at
x - Y to every grid point.  This is pointwise unbiased up to truncation
bias and needs no bandwidth; the same replicate pool yields exact draws of
J(t) (width1 + width2 + Y) for the empirical distribution function.

t = 0 and t = 1 are the Dickman case, solved by marching the delay
relation u rho'(u) = -rho(u-1); and a family of estimates over a quantile
grid feeds residual checks of the exact integral equations satisfied by
f_t and F_t (conditioning on the first pivot).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson

from . import _kernels
from .process import DEFAULT_TRUNC_EPS, TRUNCATION_BIAS_FACTOR, sample_j_values
from .rng import UniformStream, chunk_sizes
from .parallel import run_tasks

EULER_GAMMA = float(np.euler_gamma)


# ----------------------------------------------------------------------------
# Monte Carlo estimates
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityGrid:
    """Mixture Monte Carlo estimate of f_t on a grid, with pointwise SEs."""

    t: float
    xs: np.ndarray
    values: np.ndarray
    std_errs: np.ndarray
    n_samples: int
    trunc_eps: float

    def at(self, x) -> np.ndarray | float:
        """Linear interpolation; zero outside the grid range."""
        return np.interp(x, self.xs, self.values, left=0.0, right=0.0)

    def se_at(self, x) -> np.ndarray | float:
        return np.interp(x, self.xs, self.std_errs, left=0.0, right=0.0)


@dataclass(frozen=True)
class EmpiricalSample:
    """Sorted draws of J(t) (or a scaled finite-n comparison count)."""

    t: float
    draws: np.ndarray  # sorted ascending
    n: int

    @classmethod
    def from_draws(cls, t: float, draws: np.ndarray) -> "EmpiricalSample":
        return cls(t=t, draws=np.sort(np.asarray(draws, dtype=float)), n=len(draws))

    def cdf(self, x) -> np.ndarray | float:
        return np.searchsorted(self.draws, x, side="right") / self.n

    def survival(self, x) -> np.ndarray | float:
        return 1.0 - self.cdf(x)

    def mean(self) -> float:
        return float(self.draws.mean())

    def se(self) -> float:
        return float(self.draws.std(ddof=1) / math.sqrt(self.n))


def _mixture_chunk(args):
    stream, t, eps, size, xs = args
    gen = stream.generator()
    l3, r3, y, j = _kernels.triple_mixture_batch(gen, t, eps, size)
    vsum = np.zeros(len(xs))
    vsumsq = np.zeros(len(xs))
    _kernels.density_accumulate(xs, l3, r3, y, vsum, vsumsq)
    return vsum, vsumsq, j


def _mixture_pool(t, xs, n_samples, trunc_eps, rng, workers):
    rng = rng if rng is not None else UniformStream(0)
    tasks = [
        (rng.substream(c), t, trunc_eps, size, xs)
        for c, size in enumerate(chunk_sizes(n_samples))
    ]
    parts = run_tasks(_mixture_chunk, tasks, workers)
    vsum = np.zeros(len(xs))
    vsumsq = np.zeros(len(xs))
    js = []
    for ps, pq, pj in parts:  # fixed chunk order: reduction is worker-independent
        vsum += ps
        vsumsq += pq
        js.append(pj)
    return vsum, vsumsq, (np.concatenate(js) if js else np.empty(0))


def estimate_density(
    t: float,
    xs: np.ndarray,
    n_samples: int,
    trunc_eps: float = DEFAULT_TRUNC_EPS,
    rng: UniformStream | None = None,
    workers: int = 1,
) -> DensityGrid:
    """Unbiased mixture estimate of f_t on the grid xs (t interior).

    Estimates are exactly zero at grid points x <= min(t, 1-t): every
    summand's support starts strictly above that threshold.
    """
    if not (0.0 < t < 1.0):
        raise ValueError("estimate_density needs 0 < t < 1 (use dickman_density at 0/1)")
    xs = np.ascontiguousarray(np.asarray(xs, dtype=float))
    if len(xs) < 2 or np.any(np.diff(xs) <= 0):
        raise ValueError("xs must be strictly increasing with at least two points")
    vsum, vsumsq, _ = _mixture_pool(t, xs, n_samples, trunc_eps, rng, workers)
    values = vsum / n_samples
    var = np.maximum(vsumsq / n_samples - values**2, 0.0)
    std_errs = np.sqrt(var / n_samples)
    return DensityGrid(
        t=t, xs=xs, values=values, std_errs=std_errs,
        n_samples=n_samples, trunc_eps=trunc_eps,
    )


def estimate_cdf(
    t: float,
    n_samples: int,
    trunc_eps: float = DEFAULT_TRUNC_EPS,
    rng: UniformStream | None = None,
    workers: int = 1,
) -> EmpiricalSample:
    """Empirical distribution of J(t) from independent truncated paths."""
    draws = sample_j_values(t, n_samples, trunc_eps, rng, workers)
    return EmpiricalSample.from_draws(t, draws)


# ----------------------------------------------------------------------------
# Dickman case t in {0, 1}
# ----------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _dickman_march(x_max: float, step: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(grid, rho, cdf) for the Dickman function on [0, x_max].

    rho = 1 on [0, 1]; beyond, march of the delay relation
    u rho'(u) = -rho(u-1) with the step snapped so the unit delay lands on
    grid points.  The right side lags by a full unit, so each step is pure
    quadrature of known values: Simpson pairs for even offsets and the
    three-point Adams rule for odd ones (fourth order; derivative kinks at
    integer u land on pair boundaries).  cdf is the cumulative trapezoid
    of e^-gamma rho.
    """
    k = max(2 * max(int(round(0.5 / step)), 1), 2)  # even, so kinks align
    h = 1.0 / k
    npts = int(math.ceil(x_max / h)) + 1
    if (npts - 1 - k) % 2:
        npts += 1  # end on a Simpson pair boundary
    u = np.arange(npts) * h
    rho = np.ones(npts)
    f = np.zeros(npts)  # f(u) = rho(u-1)/u, the known lagged integrand
    f[k] = 1.0 / u[k]
    for j in range(k, npts - 2, 2):
        f[j + 1] = rho[j + 1 - k] / u[j + 1]
        f[j + 2] = rho[j + 2 - k] / u[j + 2]
        rho[j + 1] = rho[j] - h / 12.0 * (5.0 * f[j] + 8.0 * f[j + 1] - f[j + 2])
        rho[j + 2] = rho[j] - h / 3.0 * (f[j] + 4.0 * f[j + 1] + f[j + 2])
    pdf = math.exp(-EULER_GAMMA) * rho
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * h * (pdf[1:] + pdf[:-1]))])
    return u, rho, cdf


def dickman_density(x, step: float = 1e-3):
    """Density f_0(x) = e^-gamma rho(x) of J(0) = Z(0) - 1."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("dickman_density needs x >= 0")
    if step <= 0:
        raise ValueError("step must be positive")
    x_max = float(np.max(xa)) if xa.size else 1.0
    u, rho, _ = _dickman_march(max(2.0, math.ceil(x_max) + 1.0), step)
    out = math.exp(-EULER_GAMMA) * np.interp(xa, u, rho)
    return float(out) if np.isscalar(x) else out


def dickman_cdf(x, step: float = 1e-3):
    """Distribution function of J(0), integrated from the marched density."""
    xa = np.asarray(x, dtype=float)
    x_max = float(np.max(xa)) if xa.size else 1.0
    u, _, cdf = _dickman_march(max(2.0, math.ceil(x_max) + 1.0), step)
    out = np.interp(xa, u, cdf, left=0.0)
    return float(out) if np.isscalar(x) else out


def dickman_march_drift(x: float, step: float = 1e-3) -> float:
    """Relative Richardson drift of rho(x) between steps h and h/2."""
    coarse = dickman_density(x, step)
    fine = dickman_density(x, step / 2.0)
    return abs(coarse - fine) / fine


# ----------------------------------------------------------------------------
# Quantile family and integral-equation residuals
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantileFamily:
    """f and F estimates on a quantile grid, for the integral equations.

    Interior nodes hold mixture DensityGrids and compressed empirical CDFs
    (one shared fine x-grid); v = 0 and v = 1 are served by the Dickman
    closed form.  Nodes are computed for v <= 1/2 and mirrored through
    f_v = f_{1-v} (distributional symmetry of the interval process).
    """

    v_grid: np.ndarray
    x_grid: np.ndarray
    cdf_grid: np.ndarray
    pdf_values: np.ndarray   # (n_nodes, len(x_grid)); NaN row at v=0, 1
    pdf_ses: np.ndarray
    cdf_values: np.ndarray   # (n_nodes, len(cdf_grid)); NaN row at v=0, 1
    j_means: np.ndarray      # per-node mean of the pool's J draws
    j_ses: np.ndarray
    n_samples: int
    trunc_eps: float

    def _node(self, v: float) -> int:
        i = int(np.argmin(np.abs(self.v_grid - v)))
        if abs(self.v_grid[i] - v) > 1e-12:
            raise KeyError(f"quantile {v} is not a family node")
        return i

    def _pdf_node(self, i: int, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.v_grid[i] == 0.0 or self.v_grid[i] == 1.0:
            out = np.zeros_like(x)
            ok = x >= 0
            if np.any(ok):
                out[ok] = dickman_density(x[ok])
            return out
        return np.interp(x, self.x_grid, self.pdf_values[i], left=0.0, right=0.0)

    def _cdf_node(self, i: int, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.v_grid[i] == 0.0 or self.v_grid[i] == 1.0:
            return np.asarray(dickman_cdf(np.maximum(x, 0.0)))
        return np.interp(x, self.cdf_grid, self.cdf_values[i], left=0.0, right=1.0)

    def pdf(self, v: float, x) -> np.ndarray | float:
        """Bilinear access: exact at quantile nodes, linear between them."""
        lo = int(np.clip(np.searchsorted(self.v_grid, v) - 1, 0, len(self.v_grid) - 2))
        hi = lo + 1
        if abs(self.v_grid[lo] - v) < 1e-12:
            out = self._pdf_node(lo, x)
        elif abs(self.v_grid[hi] - v) < 1e-12:
            out = self._pdf_node(hi, x)
        else:
            w = (v - self.v_grid[lo]) / (self.v_grid[hi] - self.v_grid[lo])
            out = (1 - w) * self._pdf_node(lo, x) + w * self._pdf_node(hi, x)
        return float(out) if np.isscalar(x) else out

    def pdf_se(self, v: float, x) -> float:
        i = self._node(v)
        if self.v_grid[i] in (0.0, 1.0):
            return 0.0
        return float(np.interp(x, self.x_grid, self.pdf_ses[i], left=0.0, right=0.0))

    def cdf(self, v: float, x) -> np.ndarray | float:
        lo = int(np.clip(np.searchsorted(self.v_grid, v) - 1, 0, len(self.v_grid) - 2))
        hi = lo + 1
        if abs(self.v_grid[lo] - v) < 1e-12:
            out = self._cdf_node(lo, x)
        elif abs(self.v_grid[hi] - v) < 1e-12:
            out = self._cdf_node(hi, x)
        else:
            w = (v - self.v_grid[lo]) / (self.v_grid[hi] - self.v_grid[lo])
            out = (1 - w) * self._cdf_node(lo, x) + w * self._cdf_node(hi, x)
        return float(out) if np.isscalar(x) else out

    def density_grid(self, v: float) -> DensityGrid:
        i = self._node(v)
        if self.v_grid[i] in (0.0, 1.0):
            raise ValueError("no Monte Carlo grid at the Dickman endpoints")
        return DensityGrid(
            t=float(self.v_grid[i]), xs=self.x_grid, values=self.pdf_values[i],
            std_errs=self.pdf_ses[i], n_samples=self.n_samples, trunc_eps=self.trunc_eps,
        )


def _family_node_task(args):
    stream, v, eps, size, x_grid, cdf_grid = args
    gen = stream.generator()
    l3, r3, y, j = _kernels.triple_mixture_batch(gen, v, eps, size)
    vsum = np.zeros(len(x_grid))
    vsumsq = np.zeros(len(x_grid))
    _kernels.density_accumulate(x_grid, l3, r3, y, vsum, vsumsq)
    counts = np.searchsorted(np.sort(j), cdf_grid, side="right").astype(np.int64)
    return vsum, vsumsq, counts, float(j.sum()), float((j * j).sum())


def build_quantile_family(
    n_nodes: int = 101,
    x_max: float = 6.5,
    dx: float = 0.025,
    cdf_max: float = 12.0,
    cdf_dx: float = 0.004,
    n_samples: int = 1_000_000,
    trunc_eps: float = DEFAULT_TRUNC_EPS,
    rng: UniformStream | None = None,
    workers: int = 1,
) -> QuantileFamily:
    """Estimate the family {f_v, F_v} on a uniform quantile grid.

    One replicate pool per node serves both the density (mixture) and the
    distribution function (the pool's implied J draws).  Task streams are
    keyed by (node, chunk), so the result is worker-count independent.
    """
    rng = rng if rng is not None else UniformStream(0)
    v_grid = np.linspace(0.0, 1.0, n_nodes)
    x_grid = np.arange(0.0, x_max + dx / 2, dx)
    cdf_grid = np.arange(0.0, cdf_max + cdf_dx / 2, cdf_dx)
    half = [i for i in range(1, n_nodes - 1) if v_grid[i] <= 0.5 + 1e-12]

    tasks = []
    index = []
    for i in half:
        for c, size in enumerate(chunk_sizes(n_samples)):
            tasks.append((rng.substream(i, c), float(v_grid[i]), trunc_eps, size, x_grid, cdf_grid))
            index.append(i)
    parts = run_tasks(_family_node_task, tasks, workers)

    npts = len(x_grid)
    pdf_values = np.full((n_nodes, npts), np.nan)
    pdf_ses = np.full((n_nodes, npts), np.nan)
    cdf_values = np.full((n_nodes, len(cdf_grid)), np.nan)
    j_means = np.full(n_nodes, np.nan)
    j_ses = np.full(n_nodes, np.nan)
    sums = {
        i: [np.zeros(npts), np.zeros(npts), np.zeros(len(cdf_grid), np.int64), 0.0, 0.0]
        for i in half
    }
    for i, (vs, vq, counts, js, jsq) in zip(index, parts):
        acc = sums[i]
        acc[0] += vs
        acc[1] += vq
        acc[2] += counts
        acc[3] += js
        acc[4] += jsq
    for i in half:
        s, q, cc, js, jsq = sums[i]
        vals = s / n_samples
        var = np.maximum(q / n_samples - vals**2, 0.0)
        pdf_values[i] = vals
        pdf_ses[i] = np.sqrt(var / n_samples)
        cdf_values[i] = cc / n_samples
        j_means[i] = js / n_samples
        j_ses[i] = math.sqrt(max(jsq / n_samples - j_means[i] ** 2, 0.0) / n_samples)
    for i in range(1, n_nodes - 1):  # mirror: f_v = f_{1-v} in law
        if np.isnan(pdf_values[i, 0]):
            src = n_nodes - 1 - i
            pdf_values[i] = pdf_values[src]
            pdf_ses[i] = pdf_ses[src]
            cdf_values[i] = cdf_values[src]
            j_means[i] = j_means[src]
            j_ses[i] = j_ses[src]
    return QuantileFamily(
        v_grid=v_grid, x_grid=x_grid, cdf_grid=cdf_grid,
        pdf_values=pdf_values, pdf_ses=pdf_ses, cdf_values=cdf_values,
        j_means=j_means, j_ses=j_ses,
        n_samples=n_samples, trunc_eps=trunc_eps,
    )


def _split_nodes(v_grid: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    left = v_grid[v_grid <= t + 1e-12]
    right = v_grid[v_grid >= t - 1e-12]
    if abs(left[-1] - t) > 1e-12:
        left = np.append(left, t)
    if abs(right[0] - t) > 1e-12:
        right = np.insert(right, 0, t)
    return left, right


def _check_coverage(family: QuantileFamily, t: float, x: float) -> None:
    # transformed arguments peak at x/t - 1 and x/(1-t) - 1 near the ends
    need = max(x / t, x / (1.0 - t)) - 1.0
    have = float(family.x_grid[-1])
    if need > have + 1e-9:
        raise ValueError(
            f"probe (t={t}, x={x}) needs f up to {need:.3f}, family grid ends at {have:.3f}"
        )


def integral_eq_residual_density(family: QuantileFamily, t: float, x: float) -> float:
    """Residual RHS - f_t(x) of the first-pivot integral equation for f.

    After substituting v = (t-l)/(1-l) and v = t/r, the right-hand side is
    int_0^t f_v(x (1-v)/(1-t) - 1) dv/(1-v) + int_t^1 f_v(x v/t - 1) dv/v,
    evaluated by composite Simpson on the family's quantile grid (Dickman
    closed form at v = 0, 1).
    """
    if not (0.0 < t < 1.0):
        raise ValueError("t must lie in (0, 1)")
    _check_coverage(family, t, x)
    left, right = _split_nodes(family.v_grid, t)
    ga = np.array([family.pdf(v, x * (1 - v) / (1 - t) - 1.0) / (1.0 - v) for v in left])
    gb = np.array([family.pdf(v, x * v / t - 1.0) / v for v in right])
    rhs = simpson(ga, x=left) + simpson(gb, x=right)
    return float(rhs - family.pdf(t, x))


def integral_eq_residual_cdf(family: QuantileFamily, t: float, x: float) -> float:
    """Residual RHS - F_t(x) of the first-pivot integral equation for F.

    Same substitutions; the Jacobians make the weights (1-t)/(1-v)^2 and
    t/v^2.  No coverage guard: the compressed CDFs extend by their exact
    limits (0 below the grid, 1 beyond it), so any x is evaluable.
    """
    if not (0.0 < t < 1.0):
        raise ValueError("t must lie in (0, 1)")
    left, right = _split_nodes(family.v_grid, t)
    ga = np.array(
        [family.cdf(v, x * (1 - v) / (1 - t) - 1.0) * (1.0 - t) / (1.0 - v) ** 2 for v in left]
    )
    gb = np.array([family.cdf(v, x * v / t - 1.0) * t / v**2 for v in right])
    rhs = simpson(ga, x=left) + simpson(gb, x=right)
    return float(rhs - family.cdf(t, x))


def density_integral(grid: DensityGrid, tail_allowance: float = 0.0) -> float:
    """Simpson integral of the estimated density plus a right-tail allowance."""
    return float(simpson(grid.values, x=grid.xs)) + tail_allowance


def truncation_bias_bound(trunc_eps: float) -> float:
    return TRUNCATION_BIAS_FACTOR * trunc_eps
