"""Acceptance suite: the twelve validation criteria at full budget.

The whole suite runs once (seed 7) through the same code path as
`quickquant validate --suite all`; each test below asserts one criterion
and prints its pass/fail line.  Heavy shared artifacts (quantile family,
mgf table, 1e7-draw pools) are built lazily inside the shared context.
"""

import os

import pytest

from quickquant.validate import run_suite

SEED = 7


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    workers = int(os.environ.get("QUICKQUANT_WORKERS", "1"))
    out_dir = tmp_path_factory.mktemp("validate_out")
    result = run_suite(suite="all", seed=SEED, workers=workers, out_dir=out_dir)
    return result


def _criterion(suite, num):
    for n, slug, checks in suite.criteria:
        if n == num:
            return slug, checks
    raise KeyError(num)


def _assert_criterion(suite, num):
    slug, checks = _criterion(suite, num)
    ok = all(c.passed for c in checks)
    print(f"ACCEPTANCE [{num:2d}] {slug:<28s} {'PASS' if ok else 'FAIL'} ({len(checks)} checks)")
    failed = [c for c in checks if not c.passed]
    assert not failed, "\n".join(
        f"{c.name}: value={c.value!r} reference={c.reference!r} tol={c.tolerance!r}"
        for c in failed
    )


def test_criterion_01_knuth_formula_exact(suite):
    _assert_criterion(suite, 1)


def test_criterion_02_limit_means(suite):
    _assert_criterion(suite, 2)


def test_criterion_03_perpetuity_mean_and_support(suite):
    _assert_criterion(suite, 3)


def test_criterion_04_conditional_normalization(suite):
    _assert_criterion(suite, 4)


def test_criterion_05_mixture_density(suite):
    _assert_criterion(suite, 5)


def test_criterion_06_dickman_cross_check(suite):
    _assert_criterion(suite, 6)


def test_criterion_07_integral_equation_residuals(suite):
    _assert_criterion(suite, 7)


def test_criterion_08_left_tail(suite):
    _assert_criterion(suite, 8)


def test_criterion_09_right_tail(suite):
    _assert_criterion(suite, 9)


def test_criterion_10_convergence_rates(suite):
    _assert_criterion(suite, 10)


def test_criterion_11_worst_case_enumeration(suite):
    _assert_criterion(suite, 11)


def test_criterion_12_determinism(suite):
    _assert_criterion(suite, 12)


def test_suite_green_overall(suite):
    assert suite.all_passed
    print(f"ACCEPTANCE: {len(suite.checks)} checks all green in {suite.wall_time_s:.0f}s")


def test_validate_cli_contract(tmp_path):
    """`validate --suite quick` exits 0 and writes a JSON array of checks."""
    import json
    import subprocess
    import sys

    out_dir = tmp_path / "vq"
    proc = subprocess.run(
        [sys.executable, "-m", "quickquant.cli", "validate", "--suite", "quick",
         "--seed", str(SEED), "--out-dir", str(out_dir)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    checks = json.loads((out_dir / "checks.json").read_text())
    assert isinstance(checks, list) and checks
    assert all(set(c) == {"name", "value", "reference", "tolerance", "pass", "provenance"}
               for c in checks)
    assert all(c["pass"] for c in checks)
