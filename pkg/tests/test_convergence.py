"""Distances, rates, the large-deviation window, and dominance checks."""

import math

import numpy as np
import pytest

from quickquant import convergence
from quickquant.process import rank_for_quantile, sample_j_values, sample_quickselect_counts
from quickquant.rng import UniformStream


def stream(*key):
    return UniformStream(777001, key)


def test_ks_distance_basics():
    gen = stream(1).generator()
    x = gen.random(5000)
    assert convergence.ks_distance(x, x) == 0.0
    y = gen.random(5000) + 0.1
    assert convergence.ks_distance(x, y) == pytest.approx(0.1, abs=0.03)
    with pytest.raises(ValueError):
        convergence.ks_distance(x, np.array([]))


def test_ks_distance_against_grid():
    gen = stream(2).generator()
    x = gen.random(50_000)
    grid = np.linspace(0, 1, 1001)
    d = convergence.ks_distance(x, (grid, grid))
    assert d < 0.01


def test_wasserstein_basics():
    gen = stream(3).generator()
    x = gen.random(4000)
    assert convergence.wasserstein1(x, x) == 0.0
    assert convergence.wasserstein1(np.zeros(10), np.ones(10)) == 1.0
    with pytest.raises(ValueError):
        convergence.wasserstein1(np.zeros(10), np.ones(11))
    # unequal-size quantile mode agrees with the coupling when sizes match
    y = gen.random(4000)
    d_eq = convergence.wasserstein1(x, y)
    d_int = convergence.wasserstein1(x, y[:3999], allow_unequal=True)
    assert d_int == pytest.approx(d_eq, abs=5e-3)


def test_delta_and_ld_interval():
    assert convergence.delta_nt(100, 0.3) == pytest.approx(0.02, abs=1e-12)
    lo, hi = convergence.ld_interval_from_delta(1e-4, 1.5, 0.5)
    assert (lo, hi) == (1.5, pytest.approx(1.607, abs=2e-3))
    iv = convergence.ld_interval_from_delta(1e-2, 2.0, 0.5)
    assert convergence.interval_is_empty(iv)
    # upper endpoint grows as delta shrinks
    uppers = [convergence.ld_interval_from_delta(d, 1.1, 0.5)[1] for d in (1e-3, 1e-5, 1e-8)]
    assert uppers == sorted(uppers)
    with pytest.raises(ValueError):
        convergence.ld_interval_from_delta(0.9, 1.5, 0.5)
    with pytest.raises(ValueError):
        convergence.ld_interval(100, 0.3, 0.9, 0.5)


@pytest.fixture(scope="module")
def z03():
    return sample_j_values(0.3, 100_000, 1e-8, stream(4))


def test_ld_ratio_check(z03):
    n = 10_000
    m = rank_for_quantile(n, 0.3)
    counts = sample_quickselect_counts(n, m, 5_000, stream(5))
    iv = convergence.ld_interval(n, 0.3, 1.5, 0.5)
    assert not convergence.interval_is_empty(iv)
    p1, p2, ratio, se = convergence.ld_ratio_check(1.5, counts / n, z03 + 1.0)
    assert 0.8 <= ratio <= 1.25
    # shallow probe: both tails near 1
    p1, p2, ratio, se = convergence.ld_ratio_check(1.2, counts / n, z03 + 1.0)
    assert ratio == pytest.approx(1.0, abs=0.1)
    with pytest.raises(ValueError):
        convergence.ld_ratio_check(25.0, counts / n, z03 + 1.0)


def test_dominance_check_pass_and_fail(z03):
    v_like = z03 + 1.5  # strictly larger
    rep = convergence.dominance_check(z03, v_like, "shifted dominance")
    assert rep.passed
    rep = convergence.dominance_check(v_like, z03, "reversed dominance")
    assert not rep.passed


def test_ks_process_continuity(z03):
    # d_KS(Z(t), Z(u)) against A' (|u-t| ln 1/|u-t|)^(1/2), fitted A' small
    pairs = [(0.3, 0.31), (0.3, 0.35), (0.5, 0.45)]
    n = 30_000
    ratios = []
    for i, (t, u) in enumerate(pairs):
        a = z03[:n] if t == 0.3 else sample_j_values(t, n, 1e-8, stream(6, i, 0))
        b = sample_j_values(u, n, 1e-8, stream(6, i, 1))
        d = convergence.ks_distance(a, b)
        delta = abs(u - t)
        ratios.append(d / math.sqrt(delta * math.log(1 / delta)))
    assert max(ratios) < 10.0


def test_ks_lower_bound_probe(z03):
    t, delta = 0.3, 0.1
    n = 30_000
    b = sample_j_values(t + delta, n, 1e-8, stream(7))
    d = convergence.ks_distance(z03[:n], b)
    se = 0.5 * math.sqrt(1 / n + 1 / n)
    assert d >= delta**2 / 150 - 3 * se


def test_rate_table_structure(z03):
    data = convergence.rate_table(0.3, [100, 1000], [20_000, 20_000], z03, stream(8))
    assert [r["n"] for r in data["rows"]] == [100, 1000]
    assert data["rows"][0]["dks"] > data["rows"][1]["dks"]
    for r in data["rows"]:
        assert r["d1"] <= data["K"] * r["bound"] * (1 + 1e-12)
        assert r["dks"] <= math.sqrt(20 * r["d1"]) + 3 * 0.5 * math.sqrt(2 / 20_000)
