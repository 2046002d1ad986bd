"""Perpetuity draws, the mgf table, Chernoff envelopes, and the left-tail
series machinery."""

import math

import numpy as np
import pytest

from quickquant import tails
from quickquant.process import sample_j_values
from quickquant.rng import UniformStream


def stream(*key):
    return UniformStream(31881, key)


@pytest.fixture(scope="module")
def table():
    return tails.mgf_v_solve(4.0, 1e-3, 1e-12)


@pytest.fixture(scope="module")
def v_draws():
    return tails.sample_V_batch(400_000, 1e-8, stream(1))


@pytest.fixture(scope="module")
def pool():
    return tails.build_series_pool(150_000, 1e-8, stream(2))


def test_v_draws_basics(v_draws):
    assert v_draws.min() > 2.0
    se = v_draws.std(ddof=1) / math.sqrt(len(v_draws))
    assert abs(v_draws.mean() - 4.0) < 4 * se
    assert isinstance(tails.sample_V(1e-8, stream(3)), float)
    with pytest.raises(ValueError):
        tails.sample_V(0.0, stream(3))


def test_dominance_chain_d_z_v(v_draws):
    # D <= Z(t) <= V stochastically, probed at t in {0.1, 0.5}
    d = 1.0 + sample_j_values(0.0, 100_000, 1e-8, stream(4, 9))
    grid = np.linspace(1.0, 8.0, 60)
    sd = np.array([(d > x).mean() for x in grid])
    for i, t in enumerate((0.1, 0.5)):
        z = 1.0 + sample_j_values(t, 100_000, 1e-8, stream(4, i))
        sv = np.array([(v_draws > x).mean() for x in grid])
        sz = np.array([(z > x).mean() for x in grid])
        se_vz = np.sqrt(sv * (1 - sv) / len(v_draws) + sz * (1 - sz) / len(z))
        se_zd = np.sqrt(sd * (1 - sd) / len(d) + sz * (1 - sz) / len(z))
        assert np.all(sv >= sz - 3 * se_vz)
        assert np.all(sz >= sd - 3 * se_zd)


def test_mgf_table_properties(table):
    assert table.m(0.0) == 1.0
    m = table.values
    assert np.all(np.diff(m) > 0)
    assert np.all(np.diff(table.log_values, 2) > -1e-9)  # log-convex
    slope = (table.m(1e-3) - 1.0) / 1e-3
    assert abs(slope - 4.0) < 1e-2
    with pytest.raises(ValueError):
        table.m(5.0)
    with pytest.raises(ValueError):
        tails.mgf_v_solve(9.0)


def test_mgf_matches_monte_carlo(table, v_draws):
    # theta = 2 is included for completeness; e^{2V} is so heavy-tailed that
    # its 4 SE band is wide, which still checks the table's plausibility
    for theta in (0.25, 0.5, 1.0, 2.0):
        ev = np.exp(theta * v_draws)
        se = ev.std(ddof=1) / math.sqrt(len(ev))
        assert abs(table.m(theta) - ev.mean()) < 4 * se


def test_mgf_bound_check(table):
    for theta in (0.5, 3.0):
        rep = tails.mgf_bound_check(table, theta, 0.5, 10.0)
        assert rep.passed
    with pytest.raises(ValueError):
        tails.mgf_bound_check(table, 0.0, 0.5, 10.0)


def test_envelopes(table):
    s_prev, d_prev = math.inf, math.inf
    for x in np.linspace(3.0, 10.0, 15):
        s, d = tails.chernoff_envelopes(x, table)
        assert s < s_prev and d < d_prev
        s_prev, d_prev = s, d
    assert tails.survival_envelope(1.5, table) >= 1.0  # uninformative below the mean
    with pytest.raises(ValueError):
        tails.chernoff_envelopes(0.5, table)
    with pytest.raises(ValueError):
        tails.density_envelope(2.0, table)
    c = tails.c_theta_envelope(1.0, table)
    assert c == pytest.approx(max(10 * math.e**3, 4 * math.e**2 * table.m(1.0)), rel=1e-9)


def test_tail_envelope_values():
    assert tails.tail_envelope(5.0) == pytest.approx(-10.426614538806054, abs=1e-9)
    # just above e the second term vanishes
    x = math.e * 1.0000001
    assert tails.tail_envelope(x) == pytest.approx(-math.e, abs=1e-2)
    with pytest.raises(ValueError):
        tails.tail_envelope(2.0)


def test_c1_estimate(pool):
    c1, se1 = pool.coeff(1)
    assert c1 + 3 * se1 > 0.0879
    assert c1 - 3 * se1 < 0.3750
    # same numbers through the public helper
    v, s = tails.left_series_coeff(1, 0, pool=pool)
    assert (v, s) == (c1, se1)


def test_ck_bounds_and_monotonicity(pool):
    for k in range(1, 11):
        c, se = pool.coeff(k)
        assert c > 0
        assert c - 3 * se < 2 ** -(k + 1) / k * (1 + 2.0**-k)
        assert c + 3 * se > 7e-4 * 2 ** -(k + 1) / (k + 1) ** 2
    for k in range(1, 10):
        d = 2.0**k * pool.term_samples(k) - 2.0 ** (k + 1) * pool.term_samples(k + 1)
        assert d.mean() + 3 * d.std(ddof=1) / math.sqrt(pool.n) > 0


def test_series_eval(pool):
    coeffs = tails.SeriesCoeffs.from_pool(pool, 10)
    v, rem = tails.left_series_eval(0.3, 0.0, coeffs)
    assert v == 0.0 and rem == 0.0
    v1, _ = tails.left_series_eval(0.3, 0.2, coeffs)
    v2, _ = tails.left_series_eval(0.5, 0.2, coeffs)
    assert v2 == pytest.approx(2 * v1, rel=1e-12)  # doubled at t = 1/2
    assert tails.series_domain_max(0.3) == 1.0
    assert tails.series_domain_max(0.45) == pytest.approx(1 / 0.45 - 2)
    with pytest.raises(ValueError):
        tails.left_series_eval(0.45, 0.5, coeffs)
    with pytest.raises(ValueError):
        tails.left_series_eval(0.7, 0.1, coeffs)


def test_right_derivative():
    assert tails.right_derivative(0.25, 0.2) == pytest.approx(0.8)
    assert tails.right_derivative(0.5, 0.2) == pytest.approx(0.8)
    with pytest.raises(ValueError):
        tails.right_derivative(0.7, 0.2)


def test_right_derivative_against_forward_difference(pool):
    t, h = 0.3, 0.02
    c1, _ = pool.coeff(1)
    import quickquant.density as density

    grid = density.estimate_density(
        t, np.array([t, t + h, t + 2 * h]), 150_000, rng=stream(5)
    )
    fd = float(grid.values[1]) / h
    assert fd == pytest.approx(c1 / t, rel=0.15)
