"""Mixture density estimator, empirical CDFs, the Dickman march, and the
integral-equation residual machinery."""

import math

import numpy as np
import pytest

from quickquant.density import (
    EULER_GAMMA,
    build_quantile_family,
    density_integral,
    dickman_cdf,
    dickman_density,
    dickman_march_drift,
    estimate_cdf,
    estimate_density,
    integral_eq_residual_cdf,
    integral_eq_residual_density,
    truncation_bias_bound,
)
from quickquant.rng import UniformStream

N_QUICK = 150_000


def stream(*key):
    return UniformStream(5150, key)


@pytest.fixture(scope="module")
def grid03():
    xs = np.arange(0.0, 6.0001, 0.025)
    return estimate_density(0.3, xs, N_QUICK, rng=stream(1))


@pytest.fixture(scope="module")
def cdf03():
    return estimate_cdf(0.3, N_QUICK, rng=stream(2))


def test_grid_zero_below_min_and_bounds(grid03):
    below = grid03.values[grid03.xs <= 0.3]
    assert np.all(below == 0.0)
    assert np.all(grid03.values >= 0.0)
    assert np.all(grid03.values <= 10.0 + 5 * grid03.std_errs)


def test_grid_integral(grid03):
    # [0, 6] misses a little right-tail mass; generous band at this budget
    assert density_integral(grid03) == pytest.approx(1.0, abs=0.02)


def test_positivity_beyond_min(grid03):
    sel = (grid03.xs >= 0.3 + 0.05) & (grid03.xs <= 5.0)
    assert np.all(grid03.values[sel] - 2 * grid03.std_errs[sel] > 0)


def test_continuity_probe(grid03):
    jumps = np.abs(np.diff(grid03.values))
    h = float(grid03.xs[1] - grid03.xs[0])
    slopes = jumps / h
    lam_hat = float(np.quantile(slopes, 0.95))
    se_pair = np.hypot(grid03.std_errs[1:], grid03.std_errs[:-1])
    assert np.all(jumps <= lam_hat * h + 5 * se_pair)


def test_left_edge_concavity_probe(grid03):
    sel = (grid03.xs > 0.3) & (grid03.xs < 0.6)
    v = grid03.values[sel]
    s = grid03.std_errs[sel]
    second = v[2:] - 2 * v[1:-1] + v[:-2]
    se = np.sqrt(s[2:] ** 2 + 4 * s[1:-1] ** 2 + s[:-2] ** 2)
    assert np.all(second <= 5 * se)


@pytest.mark.parametrize("t", [0.2, 0.5])
def test_density_matches_cdf_finite_difference(t):
    xs = np.arange(0.0, 4.0001, 0.025)
    grid = estimate_density(t, xs, 100_000, rng=stream(9, int(t * 10), 0))
    cdf = estimate_cdf(t, 100_000, rng=stream(9, int(t * 10), 1))
    for x in np.linspace(min(t, 1 - t) + 0.2, 3.0, 20):
        fd = (cdf.cdf(x + 0.05) - cdf.cdf(x - 0.05)) / 0.1
        p = cdf.cdf(x + 0.05) - cdf.cdf(x - 0.05)
        se_fd = math.sqrt(max(p * (1 - p), 1e-12) / cdf.n) / 0.1
        se = math.hypot(float(grid.se_at(x)), se_fd)
        assert abs(float(grid.at(x)) - fd) < 5 * se + 1e-3


def test_density_symmetry_in_t():
    xs = np.arange(0.0, 5.0001, 0.05)
    a = estimate_density(0.3, xs, 60_000, rng=stream(3, 0))
    b = estimate_density(0.7, xs, 60_000, rng=stream(3, 1))
    se = np.hypot(a.std_errs, b.std_errs)
    diff = np.abs(a.values - b.values)
    assert np.all(diff <= 5 * se + 1e-12)


def test_cdf_sample_properties(cdf03):
    assert np.all(np.diff(cdf03.draws) >= 0)
    assert cdf03.draws[0] >= 0.3 - truncation_bias_bound(1e-8)
    assert cdf03.cdf(0.3) == 0.0
    assert cdf03.cdf(50.0) == 1.0
    target = 1 + 2 * (-(0.3 * math.log(0.3) + 0.7 * math.log(0.7)))
    assert abs(cdf03.mean() - target) < 4 * cdf03.se()


def test_estimate_density_domain():
    xs = np.linspace(0, 2, 10)
    with pytest.raises(ValueError):
        estimate_density(0.0, xs, 100, rng=stream(4))
    with pytest.raises(ValueError):
        estimate_density(0.5, xs[::-1], 100, rng=stream(4))


def test_dickman_values():
    assert dickman_density(0.0) == pytest.approx(math.exp(-EULER_GAMMA), abs=1e-12)
    assert dickman_density(0.5) == pytest.approx(math.exp(-EULER_GAMMA), abs=1e-12)
    assert dickman_density(1.5) == pytest.approx(
        math.exp(-EULER_GAMMA) * (1 - math.log(1.5)), abs=1e-9
    )
    assert dickman_density(3.0) / math.exp(-EULER_GAMMA) == pytest.approx(
        0.0486083882911316, abs=1e-9
    )
    with pytest.raises(ValueError):
        dickman_density(-1.0)


def test_dickman_richardson_drift():
    assert dickman_march_drift(3.0) < 1e-6
    assert dickman_march_drift(8.0) < 1e-6


def test_dickman_cdf_consistency():
    xs = np.linspace(0, 12, 400)
    cdf = dickman_cdf(xs)
    assert np.all(np.diff(cdf) >= 0)
    assert cdf[-1] == pytest.approx(1.0, abs=1e-6)
    # cdf integrates the density
    mid = 0.5 * (xs[1:] + xs[:-1])
    num = np.cumsum(dickman_density(mid) * np.diff(xs))
    assert np.max(np.abs(num - cdf[1:])) < 1e-4


@pytest.fixture(scope="module")
def small_family():
    return build_quantile_family(n_nodes=51, n_samples=50_000, rng=stream(5))


def test_family_interpolation_modes(small_family):
    fam = small_family
    t = fam.v_grid[25]
    assert fam.pdf(t, 1.5) == pytest.approx(float(fam.density_grid(t).at(1.5)), rel=1e-12)
    # off-node access mixes the two neighbors
    mid = 0.5 * (fam.v_grid[25] + fam.v_grid[26])
    lo = fam.pdf(fam.v_grid[25], 1.5)
    hi = fam.pdf(fam.v_grid[26], 1.5)
    assert min(lo, hi) - 1e-12 <= fam.pdf(mid, 1.5) <= max(lo, hi) + 1e-12
    assert fam.pdf(0.0, 0.5) == pytest.approx(dickman_density(0.5), rel=1e-9)
    assert fam.cdf(1.0, 2.0) == pytest.approx(dickman_cdf(2.0), rel=1e-9)


def test_family_mirror_symmetry(small_family):
    fam = small_family
    assert np.array_equal(fam.pdf_values[15], fam.pdf_values[35])


def test_family_means_track_entropy_formula(small_family):
    # every node's pooled J draws average to 1 + 2 H(v); 5 SE covers the
    # simultaneous sweep over all interior nodes
    from quickquant.exact import entropy_h

    fam = small_family
    for i, v in enumerate(fam.v_grid[1:-1], start=1):
        target = 1.0 + 2.0 * entropy_h(float(v))
        assert abs(fam.j_means[i] - target) < 5 * fam.j_ses[i], float(v)


def test_residuals_small_budget(small_family):
    fam = small_family
    for t_idx, x in ((25, 1.5), (15, 1.0), (15, 2.0)):
        t = float(fam.v_grid[t_idx])
        assert abs(integral_eq_residual_density(fam, t, x)) < 0.05
        assert abs(integral_eq_residual_cdf(fam, t, x)) < 0.03
    t = float(small_family.v_grid[15])
    assert integral_eq_residual_density(fam, t, 0.25) == 0.0
    assert integral_eq_residual_cdf(fam, t, 0.25) == 0.0


def test_cdf_residual_vanishes_far_right(small_family):
    # both sides of the distribution-function equation approach 1; all that
    # remains is the Simpson error of the smooth weights at this grid
    t = float(small_family.v_grid[25])
    assert abs(integral_eq_residual_cdf(small_family, t, 25.0)) < 1e-4


def test_family_worker_count_invariance():
    # 600k samples per node -> three fixed chunks, reduced in chunk order
    kw = dict(n_nodes=11, n_samples=600_000, rng=stream(6))
    a = build_quantile_family(workers=1, **kw)
    b = build_quantile_family(workers=2, **kw)
    assert np.array_equal(a.pdf_values[1:-1], b.pdf_values[1:-1])
    assert np.array_equal(a.cdf_values[1:-1], b.cdf_values[1:-1])
    assert np.array_equal(a.pdf_ses[1:-1], b.pdf_ses[1:-1])


def test_residual_domain(small_family):
    with pytest.raises(ValueError):
        integral_eq_residual_density(small_family, 0.0, 1.0)
    with pytest.raises(ValueError):
        # transformed argument would fall beyond the family's x grid
        integral_eq_residual_density(small_family, float(small_family.v_grid[15]), 3.0)
