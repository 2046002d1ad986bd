"""Finite-n versus limit: distances, rates, dominance, large deviations.

The discretization gap delta_{n,t} = |m_n/n - t| + 1/n drives both the
Wasserstein rate K delta ln(1/delta) and the Kolmogorov-Smirnov rate
sqrt(20 d_1); the large-deviation window I_n marks where finite-n tail
probabilities track the limit's.  Distances are computed exactly from
sorted samples, no binning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .density import EmpiricalSample
from .exact import worst_case_probability  # re-exported surface
from .process import rank_for_quantile, sample_quickselect_counts
from .report import CheckReport
from .rng import UniformStream

__all__ = [
    "ks_distance",
    "wasserstein1",
    "delta_nt",
    "ld_interval",
    "ld_ratio_check",
    "dominance_check",
    "worst_case_probability",
    "LdReport",
    "rate_table",
]


def _as_sorted(a) -> np.ndarray:
    if isinstance(a, EmpiricalSample):
        return a.draws
    out = np.sort(np.asarray(a, dtype=float))
    if out.size == 0:
        raise ValueError("empty sample")
    return out


def ks_distance(a, b) -> float:
    """Sup-norm distance between two empirical CDFs, or sample vs CDF grid.

    Two-sample mode evaluates both CDFs at every jump point; grid mode
    passes b as (xs, Fs) and compares the sample's upper/lower staircase
    against the interpolated reference at each draw.
    """
    x = _as_sorted(a)
    n = len(x)
    if isinstance(b, tuple) and len(b) == 2 and not isinstance(b[0], (int, float)):
        xs, fs = np.asarray(b[0], float), np.asarray(b[1], float)
        ref = np.interp(x, xs, fs, left=0.0, right=float(fs[-1]))
        hi = np.arange(1, n + 1) / n
        lo = np.arange(0, n) / n
        return float(np.max(np.maximum(np.abs(hi - ref), np.abs(lo - ref))))
    y = _as_sorted(b)
    m = len(y)
    grid = np.concatenate([x, y])
    fx = np.searchsorted(x, grid, side="right") / n
    fy = np.searchsorted(y, grid, side="right") / m
    return float(np.max(np.abs(fx - fy)))


def wasserstein1(a, b, allow_unequal: bool = False) -> float:
    """d_1 distance: mean absolute difference of order statistics.

    Requires equal sample sizes (the order-statistic coupling); with
    allow_unequal the exact integral of |F_a - F_b| is used instead, which
    coincides with the coupling when sizes match.
    """
    x = _as_sorted(a)
    y = _as_sorted(b)
    if len(x) == len(y):
        return float(np.mean(np.abs(x - y)))
    if not allow_unequal:
        raise ValueError("sample sizes differ; pass allow_unequal=True for quantile mode")
    grid = np.sort(np.concatenate([x, y]))
    fx = np.searchsorted(x, grid[:-1], side="right") / len(x)
    fy = np.searchsorted(y, grid[:-1], side="right") / len(y)
    return float(np.sum(np.abs(fx - fy) * np.diff(grid)))


def delta_nt(n: int, t: float, m_n: int | None = None) -> float:
    """delta_{n,t} = |m_n/n - t| + 1/n with the default rank floor(nt)+1."""
    m = rank_for_quantile(n, t) if m_n is None else m_n
    return abs(m / n - t) + 1.0 / n


def ld_interval(n: int, t: float, c: float, omega_n: float,
                m_n: int | None = None) -> tuple[float, float]:
    """Large-deviation window [c, (1/2)(L1/L2)(1 - omega_n/L2)] with
    L1 = ln(1/delta_n), L2 = ln ln(1/delta_n); possibly empty (hi < c)."""
    if c <= 1.0:
        raise ValueError("need c > 1")
    d = delta_nt(n, t, m_n)
    return ld_interval_from_delta(d, c, omega_n)


def ld_interval_from_delta(delta: float, c: float, omega_n: float) -> tuple[float, float]:
    l1 = math.log(1.0 / delta)
    if l1 <= 1.0:
        raise ValueError("delta too large: ln ln(1/delta) undefined or nonpositive")
    l2 = math.log(l1)
    hi = 0.5 * (l1 / l2) * (1.0 - omega_n / l2)
    return (c, hi)


def interval_is_empty(iv: tuple[float, float]) -> bool:
    return iv[1] < iv[0]


@dataclass(frozen=True)
class LdReport:
    """Large-deviation comparison of C_n(t)/n against the limit Z(t)."""

    t: float
    n: int
    m_n: int
    delta: float
    interval: tuple[float, float]
    ratios: list[tuple[float, float, float, float]] = field(default_factory=list)
    # entries: (x, P(C_n/n > x), P(Z > x), ratio)

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "n": self.n,
            "m_n": self.m_n,
            "delta": self.delta,
            "interval": None if interval_is_empty(self.interval) else list(self.interval),
            "ratios": [list(r) for r in self.ratios],
        }


MIN_EXPECTED_HITS = 30  # below this, naive MC tail estimates are declared out of reach


def ld_ratio_check(
    x: float,
    cn_over_n: np.ndarray,
    z_draws: np.ndarray,
) -> tuple[float, float, float, float]:
    """(P1, P2, ratio, ratio_se) for P(C_n/n > x) vs P(Z > x), delta method."""
    n1, n2 = len(cn_over_n), len(z_draws)
    p1 = float(np.mean(cn_over_n > x))
    p2 = float(np.mean(z_draws > x))
    if p1 * n1 < MIN_EXPECTED_HITS or p2 * n2 < MIN_EXPECTED_HITS:
        raise ValueError(f"tail at x={x} too deep for the replicate budget")
    ratio = p1 / p2
    se = ratio * math.sqrt((1 - p1) / (p1 * n1) + (1 - p2) / (p2 * n2))
    return p1, p2, ratio, se


def dominance_check(
    lower: np.ndarray,
    upper: np.ndarray,
    name: str,
    grid: np.ndarray | None = None,
    n_grid: int = 200,
    slack_se: float = 3.0,
    provenance: str = "PAPER",
) -> CheckReport:
    """Stochastic dominance lower <= upper: F_lower >= F_upper pointwise.

    Checked on a grid within slack_se combined binomial SEs; the report
    value is the worst signed margin (negative = violated beyond noise).
    """
    lo = np.sort(np.asarray(lower, float))
    up = np.sort(np.asarray(upper, float))
    if grid is None:
        all_min = min(lo[0], up[0])
        all_max = max(np.quantile(lo, 0.9999), np.quantile(up, 0.9999))
        grid = np.linspace(all_min, all_max, n_grid)
    f_lo = np.searchsorted(lo, grid, side="right") / len(lo)
    f_up = np.searchsorted(up, grid, side="right") / len(up)
    se = np.sqrt(f_lo * (1 - f_lo) / len(lo) + f_up * (1 - f_up) / len(up))
    margin = f_lo - f_up + slack_se * se
    worst = float(np.min(margin))
    return CheckReport(
        name=name,
        value=worst,
        reference=f">= 0 (F_lower >= F_upper within {slack_se:g} SE)",
        tolerance=0.0,
        passed=bool(worst >= 0.0),
        provenance=provenance,
    )


def rate_table(
    t: float,
    n_list: list[int],
    reps_list: list[int],
    z_draws: np.ndarray,
    rng: UniformStream,
    workers: int = 1,
) -> dict:
    """Convergence rates of C_n(t)/n toward Z(t) over a ladder of n.

    Returns per-n rows (n, delta, d1, dks, k_ratio, a_ratio) plus the
    fitted constants K = max d1 / (delta ln 1/delta) and
    A = max dks / sqrt(delta ln 1/delta).
    """
    rows = []
    for idx, (n, reps) in enumerate(zip(n_list, reps_list)):
        m = rank_for_quantile(n, t)
        counts = sample_quickselect_counts(n, m, reps, rng.substream(idx), workers)
        cn = counts / n
        z = z_draws[:reps] + 1.0  # J draws -> Z draws, sizes matched
        d1 = wasserstein1(cn, z)
        dks = ks_distance(cn, z)
        d = delta_nt(n, t, m)
        bound = d * math.log(1.0 / d)
        rows.append(
            {
                "n": n, "delta": d, "d1": d1, "dks": dks, "bound": bound,
                "k_ratio": d1 / bound, "a_ratio": dks / math.sqrt(bound),
            }
        )
    return {
        "t": t,
        "rows": rows,
        "K": max(r["k_ratio"] for r in rows),
        "A": max(r["a_ratio"] for r in rows),
    }
