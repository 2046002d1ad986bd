"""Exact finite-n quantities: harmonic numbers, Knuth's expectation formula,
and the exhaustive permutation oracle.

Everything here is exact rational arithmetic (fractions.Fraction); the
enumeration oracle runs deterministic first-arrival-pivot QuickSelect over
all n! arrival orders and is the independent cross-check for the closed
formula.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels

# n! grows too fast beyond this; 9! = 362880 permutations stay under a second.
ENUMERATION_CAP = 9


def harmonic(n: int) -> Fraction:
    """H_n = sum_{i=1..n} 1/i as an exact rational; H_0 = 0."""
    if n < 0:
        raise ValueError("harmonic: n must be >= 0")
    return sum((Fraction(1, i) for i in range(1, n + 1)), Fraction(0))


def entropy_h(x: float) -> float:
    """Binary entropy H(x) = -x ln x - (1-x) ln(1-x), with 0 ln 0 = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("entropy_h: x must lie in [0, 1]")
    s = 0.0
    if x > 0.0:
        s -= x * math.log(x)
    if x < 1.0:
        s -= (1.0 - x) * math.log(1.0 - x)
    return s


def expected_comparisons_exact(n: int, m: int) -> Fraction:
    """Exact E C_{n,m} = 2[(n+1)H_n - (n+3-m)H_{n+1-m} - (m+2)H_m + (n+3)].

    Symmetric under m <-> n+1-m.
    """
    _check_rank(n, m)
    return 2 * (
        (n + 1) * harmonic(n)
        - (n + 3 - m) * harmonic(n + 1 - m)
        - (m + 2) * harmonic(m)
        + (n + 3)
    )


@lru_cache(maxsize=None)
def _enumeration_stats(n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(totals, worst_counts) over all n! permutations, indexed by m-1.

    totals[m-1] is the integer sum of QuickSelect(n, m) comparison counts;
    worst_counts[m-1] counts permutations hitting the maximum n(n-1)/2.
    """
    if n > ENUMERATION_CAP:
        raise ValueError(f"enumeration limited to n <= {ENUMERATION_CAP} (factorial blowup)")
    perms = np.array(list(itertools.permutations(range(1, n + 1))), dtype=np.int64)
    perms = perms.reshape(-1, n)
    totals, worst = _kernels.perm_stats(perms)
    return tuple(int(v) for v in totals), tuple(int(v) for v in worst)


def brute_force_expected_comparisons(n: int, m: int) -> Fraction:
    """Exact mean comparison count by enumerating all n! arrival orders."""
    _check_rank(n, m)
    totals, _ = _enumeration_stats(n)
    return Fraction(totals[m - 1], math.factorial(n))


def worst_case_probability(n: int, m: int) -> tuple[Fraction, Fraction]:
    """(enumerated, formula) for P(C_{n,m} = n(n-1)/2).

    enumerated is the exact exhaustive probability; formula is the
    binom(n-1, m-1)/n! expression for the family of permutations with the
    smaller keys increasing, the larger keys decreasing, and the target
    last.  The two are NOT equal in general (n=3, m=2 gives 2/3 vs 1/3:
    that family attains the maximum but does not exhaust it), so callers
    should only rely on enumerated >= formula.
    """
    _check_rank(n, m)
    _, worst = _enumeration_stats(n)
    enumerated = Fraction(worst[m - 1], math.factorial(n))
    formula = Fraction(math.comb(n - 1, m - 1), math.factorial(n))
    return enumerated, formula


def _check_rank(n: int, m: int) -> None:
    if n < 1:
        raise ValueError("list size n must be >= 1")
    if not 1 <= m <= n:
        raise ValueError(f"rank m={m} out of range 1..{n}")
