"""Self-running validation suite.

Twelve numbered criteria cover the whole laboratory: exact enumeration
against the closed expectation formula, limit means, the perpetuity bound,
conditional-density normalization, the mixture density's support/bound/mass
properties, the Dickman cross-check, integral-equation residuals, left-tail
series, right-tail envelopes, finite-n convergence rates, the worst-case
probability enumeration, and byte-level determinism.

Each criterion returns CheckReports whose tolerances are pinned here (4 SE
for Monte Carlo means, 3 SE for tail/dominance probes, fixed numbers where
stated).  The "all" suite runs the full budgets; "quick" is a scaled-down
smoke battery used by the determinism check and by CLI demos, with MC-driven
fixed tolerances widened by the budget ratio.
"""

from __future__ import annotations

import math
import subprocess
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import conditional, convergence, density, exact, tails
from .density import EULER_GAMMA
from .process import sample_j_values
from .report import CheckReport, checks_to_json, rational_str, write_csv, write_json
from .rng import DEFAULT_SEED, UniformStream


@dataclass(frozen=True)
class Budget:
    """Replicate counts and tolerance scaling for one suite flavor."""

    paths_mean: int = 100_000
    v_pool: int = 10_000_000
    v_mean: int = 1_000_000
    norm_triples: int = 20
    assembly_probes: int = 10_000
    mixture_samples: int = 1_000_000
    dickman_draws: int = 1_000_000
    family_nodes: int = 101
    family_samples: int = 1_000_000
    ck_samples: int = 1_000_000
    z_big: int = 10_000_000
    z_side: int = 1_000_000
    rate_reps: tuple[int, ...] = (100_000, 100_000, 30_000)
    mc_tol_scale: float = 1.0
    run_determinism: bool = True

    @classmethod
    def quick(cls) -> "Budget":
        return cls(
            paths_mean=20_000,
            v_pool=200_000,
            v_mean=200_000,
            norm_triples=6,
            assembly_probes=1_000,
            mixture_samples=100_000,
            dickman_draws=100_000,
            family_nodes=51,
            family_samples=50_000,
            ck_samples=100_000,
            z_big=500_000,
            z_side=200_000,
            rate_reps=(20_000, 20_000, 2_000),
            mc_tol_scale=6.0,
            run_determinism=False,
        )


RATE_NS = (100, 1_000, 10_000)
RESIDUAL_XS = (1.0, 1.25, 1.5, 1.75, 2.0)
ENVELOPE_XS = (3.0, 4.0, 5.0)
MGF_CONVENTION = (0.5, 10.0)  # (eps, a) for the mgf upper-bound check


class SuiteContext:
    """Lazily built shared artifacts, all keyed off one seed."""

    def __init__(self, seed: int, budget: Budget, workers: int = 1, trunc_eps: float = 1e-8):
        self.seed = seed
        self.budget = budget
        self.workers = workers
        self.trunc_eps = trunc_eps
        self.root = UniformStream(seed)
        self._cache: dict[str, object] = {}

    def _get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    @property
    def mgf_table(self) -> tails.MgfTable:
        return self._get("mgf", lambda: tails.mgf_v_solve(4.0, 1e-3, 1e-12))

    @property
    def v_pool(self) -> np.ndarray:
        return self._get(
            "v",
            lambda: tails.sample_V_batch(
                self.budget.v_pool, self.trunc_eps, self.root.substream(2), self.workers
            ),
        )

    def mixture_grid(self, t: float, key: int) -> density.DensityGrid:
        def build():
            xs = np.arange(0.0, 8.0 + 0.0125, 0.025)
            return density.estimate_density(
                t, xs, self.budget.mixture_samples, self.trunc_eps,
                self.root.substream(5, key), self.workers,
            )

        return self._get(f"grid{key}", build)

    @property
    def grid02(self) -> density.DensityGrid:
        return self.mixture_grid(0.2, 0)

    @property
    def grid05(self) -> density.DensityGrid:
        return self.mixture_grid(0.5, 1)

    @property
    def j0_draws(self) -> np.ndarray:
        return self._get(
            "j0",
            lambda: sample_j_values(
                0.0, self.budget.dickman_draws, self.trunc_eps,
                self.root.substream(6), self.workers,
            ),
        )

    @property
    def family(self) -> density.QuantileFamily:
        return self._get(
            "family",
            lambda: density.build_quantile_family(
                n_nodes=self.budget.family_nodes,
                n_samples=self.budget.family_samples,
                trunc_eps=self.trunc_eps,
                rng=self.root.substream(10),
                workers=self.workers,
            ),
        )

    @property
    def ck_pool(self) -> tails.SeriesPool:
        return self._get(
            "ck",
            lambda: tails.build_series_pool(
                self.budget.ck_samples, self.trunc_eps, self.root.substream(7), self.workers
            ),
        )

    @property
    def coeffs(self) -> tails.SeriesCoeffs:
        return self._get("coeffs", lambda: tails.SeriesCoeffs.from_pool(self.ck_pool, 10))

    @property
    def z03_draws(self) -> np.ndarray:
        return self._get(
            "z03",
            lambda: sample_j_values(
                0.3, self.budget.z_big, self.trunc_eps, self.root.substream(8), self.workers
            ),
        )

    @property
    def z05_draws(self) -> np.ndarray:
        return self._get(
            "z05",
            lambda: sample_j_values(
                0.5, self.budget.z_side, self.trunc_eps, self.root.substream(9), self.workers
            ),
        )

    @property
    def rate_data(self) -> dict:
        def build():
            reps = self.budget.rate_reps
            return convergence.rate_table(
                0.3, list(RATE_NS), list(reps), self.z03_draws,
                self.root.substream(11), self.workers,
            )

        return self._get("rate", build)


def _mc_check(name, value, target, se, n_se, provenance) -> CheckReport:
    tol = n_se * se
    return CheckReport(
        name=name,
        value=float(value),
        reference=f"{target!r} +- {n_se:g} SE",
        tolerance=float(tol),
        passed=bool(abs(value - target) <= tol),
        provenance=provenance,
    )


# ----------------------------------------------------------------------------
# Criteria
# ----------------------------------------------------------------------------

def criterion_01_knuth(ctx: SuiteContext) -> list[CheckReport]:
    """Exact equality of the expectation formula and exhaustive enumeration."""
    mismatches = []
    for n in range(1, 9):
        for m in range(1, n + 1):
            if exact.expected_comparisons_exact(n, m) != exact.brute_force_expected_comparisons(n, m):
                mismatches.append((n, m))
    checks = [
        CheckReport(
            name="knuth-formula-vs-enumeration n<=8 (all m)",
            value=f"{len(mismatches)} mismatches of 36 pairs",
            reference="0 mismatches, exact rationals",
            tolerance=0.0,
            passed=not mismatches,
            provenance="DERIVED",
        )
    ]
    sym_ok = all(
        exact.expected_comparisons_exact(n, m) == exact.expected_comparisons_exact(n, n + 1 - m)
        for n in range(1, 9)
        for m in range(1, n + 1)
    )
    checks.append(
        CheckReport(
            name="rank-symmetry m <-> n+1-m, n<=8",
            value="exact" if sym_ok else "broken",
            reference="exact",
            tolerance=0.0,
            passed=sym_ok,
            provenance="TRIVIAL",
        )
    )
    return checks


def criterion_02_limit_means(ctx: SuiteContext) -> list[CheckReport]:
    """Mean of 1 + J(t) against 2 + 2 H(t)."""
    checks = []
    for i, t in enumerate((0.0, 0.1, 0.3, 0.5)):
        draws = 1.0 + sample_j_values(
            t, ctx.budget.paths_mean, ctx.trunc_eps, ctx.root.substream(1, i), ctx.workers
        )
        target = 2.0 + 2.0 * exact.entropy_h(t)
        se = draws.std(ddof=1) / math.sqrt(len(draws))
        checks.append(_mc_check(f"mean 1+J({t:g})", draws.mean(), target, se, 4.0, "PAPER"))
    return checks


def criterion_03_perpetuity(ctx: SuiteContext) -> list[CheckReport]:
    v = ctx.v_pool
    sub = v[: ctx.budget.v_mean]
    se = sub.std(ddof=1) / math.sqrt(len(sub))
    checks = [
        _mc_check(f"perpetuity mean over {len(sub)} draws", sub.mean(), 4.0, se, 4.0, "PAPER"),
        CheckReport(
            name="perpetuity draws exceed 2",
            value=float(v.min()),
            reference="> 2",
            tolerance=0.0,
            passed=bool(v.min() > 2.0),
            provenance="DERIVED",
        ),
    ]
    return checks


def _normalization_triples(ctx: SuiteContext) -> list[conditional.PivotTriple]:
    # both boundary classes are guaranteed; the rest are sampled pairs
    triples = [
        conditional.PivotTriple(t=0.3, l3=0.0, r3=0.45),
        conditional.PivotTriple(t=0.6, l3=0.0, r3=0.85),
        conditional.PivotTriple(t=0.4, l3=0.15, r3=1.0),
        conditional.PivotTriple(t=0.7, l3=0.55, r3=1.0),
    ]
    stream = ctx.root.substream(3)
    gen = stream.generator()
    k = 0
    while len(triples) < ctx.budget.norm_triples:
        t = 0.05 + 0.9 * gen.random()
        triples.append(conditional.sample_pivot_triple(t, stream.substream(k)))
        k += 1
    return triples


def criterion_04_cond_normalization(ctx: SuiteContext) -> list[CheckReport]:
    triples = _normalization_triples(ctx)
    worst = 0.0
    for tri in triples:
        worst = max(worst, abs(conditional.normalization(tri) - 1.0))
    checks = [
        CheckReport(
            name=f"conditional-density normalization, {len(triples)} triples (both boundary classes)",
            value=worst,
            reference="|integral - 1| <= 1e-06",
            tolerance=1e-6,
            passed=bool(worst <= 1e-6),
            provenance="DERIVED",
        )
    ]
    # two-assembly agreement on random interior probes
    gen = ctx.root.substream(4).generator()
    n_triples = max(ctx.budget.assembly_probes // 200, 5)
    max_diff = 0.0
    max_cond = 0.0
    for _ in range(n_triples):
        t = 0.1 + 0.8 * gen.random()
        l = t * gen.random()
        r = t + (1 - t) * gen.random()
        if l <= 0.0 or r >= 1.0 or l >= r:
            continue
        tri = conditional.PivotTriple(t=t, l3=l, r3=r)
        x = gen.random(200) * 2.4
        vals = conditional.cond_density(tri, x)
        d = np.abs(vals - conditional.cond_density_assembled(tri, x))
        max_diff = max(max_diff, float(d.max()))
        if not (np.all(np.isfinite(vals)) and np.all(vals <= conditional.bound_b(l, r) + 1e-12)):
            max_diff = math.inf
        max_cond = max(max_cond, float(np.max(vals)))
    checks.append(
        CheckReport(
            name=f"two-assembly agreement + b-bound domination on ~{n_triples * 200} probes",
            value=max_diff,
            reference="<= 1e-12",
            tolerance=1e-12,
            passed=bool(max_diff <= 1e-12),
            provenance="DERIVED",
        )
    )
    checks.append(
        CheckReport(
            name="max conditional-density value over probes (reported; the 10-bound is the mixture's)",
            value=max_cond,
            reference="unbounded (sup_x f_{l,r} grows as r3 - l3 shrinks)",
            tolerance="reported only",
            passed=True,
            provenance="PAPER",
        )
    )
    return checks


def criterion_05_mixture(ctx: SuiteContext) -> list[CheckReport]:
    checks = []
    allowance = tails.survival_envelope(8.0, ctx.mgf_table)
    for grid in (ctx.grid02, ctx.grid05):
        t = grid.t
        total = density.density_integral(grid) + allowance
        tol = 0.01 * ctx.budget.mc_tol_scale
        checks.append(
            CheckReport(
                name=f"mixture integral t={t:g} (with tail allowance {allowance:.2e})",
                value=total,
                reference="1 +- 0.01",
                tolerance=tol,
                passed=bool(abs(total - 1.0) <= tol),
                provenance="DERIVED",
            )
        )
        below = grid.values[grid.xs <= min(t, 1 - t)]
        checks.append(
            CheckReport(
                name=f"exact zero below min(t,1-t), t={t:g}",
                value=float(np.max(np.abs(below))) if len(below) else 0.0,
                reference="== 0 exactly",
                tolerance=0.0,
                passed=bool(np.all(below == 0.0)),
                provenance="PAPER",
            )
        )
        sup = float(grid.values.max())
        checks.append(
            CheckReport(
                name=f"sup density t={t:g} <= 10",
                value=sup,
                reference="<= 10",
                tolerance=0.0,
                passed=bool(sup <= 10.0),
                provenance="PAPER",
            )
        )
        checks.append(
            CheckReport(
                name=f"sup density t={t:g} vs e^-gamma (reported, conjecture not asserted)",
                value=sup,
                reference=f"conjectured <= {math.exp(-EULER_GAMMA)!r}",
                tolerance="reported only",
                passed=True,
                provenance="PAPER",
            )
        )
    return checks


def criterion_06_dickman(ctx: SuiteContext) -> list[CheckReport]:
    draws = ctx.j0_draws
    u, _, cdf = density._dickman_march(float(math.ceil(draws.max()) + 1.0), 1e-3)
    ks = convergence.ks_distance(draws, (u, cdf))
    tol = 0.01 * ctx.budget.mc_tol_scale
    return [
        CheckReport(
            name=f"KS(dickman march, {len(draws)} J(0) draws)",
            value=ks,
            reference="< 0.01",
            tolerance=tol,
            passed=bool(ks < tol),
            provenance="DERIVED",
        ),
        CheckReport(
            name="dickman density at 0",
            value=density.dickman_density(0.0),
            reference=f"{math.exp(-EULER_GAMMA)!r} +- 1e-06",
            tolerance=1e-6,
            passed=bool(abs(density.dickman_density(0.0) - math.exp(-EULER_GAMMA)) <= 1e-6),
            provenance="PAPER",
        ),
    ]


def residual_probes(ctx: SuiteContext) -> list[tuple[float, float]]:
    vg = ctx.family.v_grid
    ts = [vg[np.argmin(np.abs(vg - 0.3))], vg[np.argmin(np.abs(vg - 0.5))]]
    return [(float(t), x) for t in ts for x in RESIDUAL_XS]


def criterion_07_integral_equations(ctx: SuiteContext) -> list[CheckReport]:
    fam = ctx.family
    tol_f = 0.02 * ctx.budget.mc_tol_scale
    tol_F = 0.01 * ctx.budget.mc_tol_scale
    checks = []
    for t, x in residual_probes(ctx):
        rd = density.integral_eq_residual_density(fam, t, x)
        rc = density.integral_eq_residual_cdf(fam, t, x)
        checks.append(
            CheckReport(
                name=f"density integral-equation residual (t={t:g}, x={x:g})",
                value=rd,
                reference="|residual| <= 0.02",
                tolerance=tol_f,
                passed=bool(abs(rd) <= tol_f),
                provenance="PAPER",
            )
        )
        checks.append(
            CheckReport(
                name=f"cdf integral-equation residual (t={t:g}, x={x:g})",
                value=rc,
                reference="|residual| <= 0.01",
                tolerance=tol_F,
                passed=bool(abs(rc) <= tol_F),
                provenance="PAPER",
            )
        )
    return checks


def _series_probes() -> list[tuple[float, float]]:
    return [(0.2, z) for z in (0.125, 0.25, 0.375, 0.5, 0.625)] + [
        (0.5, z) for z in (0.1, 0.2, 0.3, 0.4, 0.5)
    ]


def criterion_08_left_tail(ctx: SuiteContext) -> list[CheckReport]:
    pool = ctx.ck_pool
    co = ctx.coeffs
    checks = []
    c1, se1 = co.c_values[0], co.c_errs[0]
    checks.append(
        CheckReport(
            name="c_1 inside (0.0879, 0.3750) within 3 SE",
            value=float(c1),
            reference="(0.0879, 0.3750)",
            tolerance=float(3 * se1),
            passed=bool(c1 + 3 * se1 > 0.0879 and c1 - 3 * se1 < 0.3750),
            provenance="PAPER",
        )
    )
    upper_margin = math.inf
    lower_margin = math.inf
    for k, c, se in zip(co.ks, co.c_values, co.c_errs):
        ub = 2.0 ** -(k + 1) / k * (1 + 2.0**-k)
        lb = 7e-4 * 2.0 ** -(k + 1) / (k + 1) ** 2
        upper_margin = min(upper_margin, ub - (c - 3 * se))
        lower_margin = min(lower_margin, (c + 3 * se) - lb)
    checks.append(
        CheckReport(
            name="c_k below 2^-(k+1) k^-1 (1+2^-k) within 3 SE, k<=10 (worst margin)",
            value=float(upper_margin),
            reference=">= 0",
            tolerance=0.0,
            passed=bool(upper_margin >= 0),
            provenance="PAPER",
        )
    )
    checks.append(
        CheckReport(
            name="c_k above 0.0007 2^-(k+1) (k+1)^-2 within 3 SE, k<=10 (worst margin)",
            value=float(lower_margin),
            reference=">= 0",
            tolerance=0.0,
            passed=bool(lower_margin >= 0),
            provenance="PAPER",
        )
    )
    # 2^k c_k nonincreasing within 3 SE, pairwise with pooled covariances
    worst = math.inf
    for k in range(1, 10):
        d = 2.0**k * pool.term_samples(k) - 2.0 ** (k + 1) * pool.term_samples(k + 1)
        se = d.std(ddof=1) / math.sqrt(pool.n)
        worst = min(worst, float(d.mean() + 3 * se))
    checks.append(
        CheckReport(
            name="2^k c_k nonincreasing within 3 SE (worst pair margin)",
            value=float(worst),
            reference=">= 0",
            tolerance=0.0,
            passed=bool(worst >= 0),
            provenance="PAPER",
        )
    )
    for t, z in _series_probes():
        grid = ctx.grid02 if t == 0.2 else ctx.grid05
        x = t * (1 + z)
        sv, remainder = tails.left_series_eval(t, z, co)
        se_s = tails.series_vs_density_error(t, z, co, pool)
        fhat = float(grid.at(x))
        se_f = float(grid.se_at(x))
        tol = 3 * math.hypot(se_s, se_f) + remainder
        checks.append(
            CheckReport(
                name=f"series vs density at t={t:g}, z={z:g} (x={x:g})",
                value=float(sv - fhat),
                reference="0 +- 3 combined SE + remainder",
                tolerance=float(tol),
                passed=bool(abs(sv - fhat) <= tol),
                provenance="DERIVED",
            )
        )
    return checks


def criterion_09_right_tail(ctx: SuiteContext) -> list[CheckReport]:
    table = ctx.mgf_table
    zj = ctx.z03_draws  # J(0.3) draws
    z = zj + 1.0
    v = ctx.v_pool
    d = ctx.j0_draws + 1.0
    fam = ctx.family
    t_node = float(fam.v_grid[np.argmin(np.abs(fam.v_grid - 0.3))])
    checks = []
    for x in ENVELOPE_XS:
        emp = float(np.mean(z > x))
        bound = tails.survival_envelope(x, table)
        checks.append(
            CheckReport(
                name=f"chernoff survival envelope at x={x:g} dominates P(Z(0.3)>x)",
                value=emp,
                reference=f"<= {bound!r}",
                tolerance=0.0,
                passed=bool(emp <= bound),
                provenance="PAPER",
            )
        )
        fhat = float(fam.pdf(t_node, x))
        se = fam.pdf_se(t_node, x)
        dbound = tails.density_envelope(x, table)
        checks.append(
            CheckReport(
                name=f"chernoff density envelope at x={x:g} dominates f(0.3) + 3 SE",
                value=fhat + 3 * se,
                reference=f"<= {dbound!r}",
                tolerance=0.0,
                passed=bool(fhat + 3 * se <= dbound),
                provenance="PAPER",
            )
        )
    # two-term envelope sandwich of the log-survival at x = 5
    x = 5.0
    hits = float(np.sum(zj > x))
    ell = tails.tail_envelope(x)
    if hits >= convergence.MIN_EXPECTED_HITS:
        ln_surv = math.log(hits / len(zj))
        checks.append(
            CheckReport(
                name="log-survival of J(0.3) at x=5 inside l(x) +- 6x",
                value=ln_surv,
                reference=f"[{ell - 6 * x!r}, {ell + 6 * x!r}]",
                tolerance=float(6 * x),
                passed=bool(ell - 6 * x <= ln_surv <= ell + 6 * x),
                provenance="DERIVED",
            )
        )
    else:
        checks.append(
            CheckReport(
                name="log-survival of J(0.3) at x=5 inside l(x) +- 6x",
                value=f"only {hits:.0f} hits (needs >= {convergence.MIN_EXPECTED_HITS})",
                reference="tail out of reach for this budget",
                tolerance=float(6 * x),
                passed=False,
                provenance="DERIVED",
            )
        )
    checks.append(
        convergence.dominance_check(z, v, "stochastic sandwich: Z(0.3) <= V (F_Z >= F_V)")
    )
    checks.append(
        convergence.dominance_check(d, z, "stochastic sandwich: D <= Z(0.3) (F_D >= F_Z)")
    )
    checks.append(
        convergence.dominance_check(
            ctx.z05_draws + 1.0, v, "stochastic sandwich: Z(0.5) <= V (F_Z >= F_V)"
        )
    )
    return checks


def criterion_10_convergence(ctx: SuiteContext) -> list[CheckReport]:
    data = ctx.rate_data
    checks = []
    K = data["K"]
    for row in data["rows"]:
        checks.append(
            CheckReport(
                name=f"wasserstein rate n={row['n']}: d1 <= K delta ln(1/delta), fitted K={K:.3g}",
                value=row["d1"],
                reference=f"<= {K * row['bound']!r}",
                tolerance=0.0,
                passed=bool(row["d1"] <= K * row["bound"] * (1 + 1e-12)),
                provenance="PAPER",
            )
        )
    for i, row in enumerate(data["rows"]):
        n1 = ctx.budget.rate_reps[i]
        se_ks = 0.5 * math.sqrt(1.0 / n1 + 1.0 / n1)
        bound = math.sqrt(20.0 * row["d1"]) + 3 * se_ks
        checks.append(
            CheckReport(
                name=f"KS rate n={row['n']}: dKS <= sqrt(20 d1) + 3 SE",
                value=row["dks"],
                reference=f"<= {bound!r}",
                tolerance=float(3 * se_ks),
                passed=bool(row["dks"] <= bound),
                provenance="PAPER",
            )
        )
    # stochastic dominance of the finite-n count by its limit
    n = RATE_NS[1]
    reps = ctx.budget.rate_reps[1]
    m = convergence.rank_for_quantile(n, 0.3)
    counts = convergence.sample_quickselect_counts(n, m, reps, ctx.root.substream(13), ctx.workers)
    checks.append(
        convergence.dominance_check(
            counts / n, ctx.z03_draws[:reps] + 1.0,
            f"finite-n dominance: X_{n}(0.3) <= Z(0.3) (F_X >= F_Z)",
        )
    )
    return checks


def criterion_11_worst_case(ctx: SuiteContext) -> list[CheckReport]:
    violations = []
    for n in range(1, 9):
        for m in range(1, n + 1):
            enum, formula = exact.worst_case_probability(n, m)
            if enum < formula:
                violations.append((n, m))
    e3, f3 = exact.worst_case_probability(3, 2)
    return [
        CheckReport(
            name="worst-case probability: enumerated >= formula, n<=8 (all m)",
            value=f"{len(violations)} violations of 36 pairs",
            reference="0 violations, exact rationals",
            tolerance=0.0,
            passed=not violations,
            provenance="DERIVED",
        ),
        CheckReport(
            name="documented n=3, m=2 discrepancy reproduced",
            value=f"enumerated {rational_str(e3)} vs formula {rational_str(f3)}",
            reference="enumerated 2/3, formula 1/3",
            tolerance=0.0,
            passed=bool(e3 == Fraction(2, 3) and f3 == Fraction(1, 3)),
            provenance="DERIVED",
        ),
    ]


def criterion_12_determinism(ctx: SuiteContext) -> list[CheckReport]:
    """Byte-identical outputs of `validate --suite quick` across worker counts.

    Three CLI subprocesses (workers 1, 2, then 1 again) write into fresh
    directories; every emitted JSON/CSV must match byte for byte.
    """
    import tempfile

    outs = []
    with tempfile.TemporaryDirectory() as tmp:
        for tag, workers in (("a", 1), ("b", 2), ("c", 1)):
            out_dir = Path(tmp) / tag
            cmd = [
                sys.executable, "-m", "quickquant.cli", "validate",
                "--suite", "quick", "--seed", str(ctx.seed),
                "--workers", str(workers), "--out-dir", str(out_dir),
            ]
            proc = subprocess.run(cmd, capture_output=True, text=True)
            if proc.returncode != 0:
                return [
                    CheckReport(
                        name=f"determinism run ({tag}, workers={workers})",
                        value=f"exit {proc.returncode}: {proc.stderr[-400:]}",
                        reference="exit 0",
                        tolerance=0.0,
                        passed=False,
                        provenance="TRIVIAL",
                    )
                ]
            files = {
                p.name: p.read_bytes()
                for p in sorted(out_dir.iterdir())
                if p.suffix in (".json", ".csv") and "manifest" not in p.name
            }
            outs.append(files)
    same_names = outs[0].keys() == outs[1].keys() == outs[2].keys()
    identical = same_names and all(
        outs[0][k] == outs[1][k] == outs[2][k] for k in outs[0]
    )
    return [
        CheckReport(
            name="validate --suite quick byte-identical across workers 1/2/1",
            value=f"{len(outs[0])} files compared" if same_names else "file sets differ",
            reference="all bytes equal",
            tolerance=0.0,
            passed=bool(identical),
            provenance="TRIVIAL",
        )
    ]


CRITERIA = [
    (1, "knuth-exact", criterion_01_knuth),
    (2, "limit-means", criterion_02_limit_means),
    (3, "perpetuity", criterion_03_perpetuity),
    (4, "conditional-normalization", criterion_04_cond_normalization),
    (5, "mixture-density", criterion_05_mixture),
    (6, "dickman", criterion_06_dickman),
    (7, "integral-equations", criterion_07_integral_equations),
    (8, "left-tail", criterion_08_left_tail),
    (9, "right-tail", criterion_09_right_tail),
    (10, "convergence-rates", criterion_10_convergence),
    (11, "worst-case-enumeration", criterion_11_worst_case),
    (12, "determinism", criterion_12_determinism),
]


@dataclass
class SuiteResult:
    suite: str
    seed: int
    criteria: list[tuple[int, str, list[CheckReport]]] = field(default_factory=list)
    wall_time_s: float = 0.0

    @property
    def checks(self) -> list[CheckReport]:
        return [c for _, _, cs in self.criteria for c in cs]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def criterion_lines(self) -> list[str]:
        lines = []
        for num, slug, cs in self.criteria:
            ok = all(c.passed for c in cs)
            lines.append(
                f"[{num:2d}] {slug:<28s} {'PASS' if ok else 'FAIL'} ({len(cs)} checks)"
            )
        return lines


def run_suite(
    suite: str = "all",
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    out_dir: Path | str | None = None,
    echo=None,
) -> SuiteResult:
    """Run the validation suite and optionally write its reports."""
    if suite not in ("all", "quick"):
        raise ValueError("suite must be 'all' or 'quick'")
    budget = Budget() if suite == "all" else Budget.quick()
    ctx = SuiteContext(seed=seed, budget=budget, workers=workers)
    result = SuiteResult(suite=suite, seed=seed)
    start = time.time()
    for num, slug, fn in CRITERIA:
        if num == 12 and not budget.run_determinism:
            continue
        checks = fn(ctx)
        result.criteria.append((num, slug, checks))
        if echo:
            ok = all(c.passed for c in checks)
            echo(f"[{num:2d}] {slug:<28s} {'PASS' if ok else 'FAIL'} ({len(checks)} checks)")
    result.wall_time_s = time.time() - start
    if out_dir is not None:
        write_suite_outputs(ctx, result, Path(out_dir))
    return result


def write_suite_outputs(ctx: SuiteContext, result: SuiteResult, out_dir: Path) -> list[str]:
    """Deterministic report files: checks JSON plus the main tables as CSV."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    p = write_json(out_dir / "checks.json", checks_to_json(result.checks))
    written.append(p.name)

    for grid in (ctx.grid02, ctx.grid05):
        rows = zip([grid.t] * len(grid.xs), grid.xs, grid.values, grid.std_errs)
        p = write_csv(
            out_dir / f"density_t{grid.t:g}.csv", ["t", "x", "value", "std_err"],
            ([t, float(x), float(v), float(s)] for t, x, v, s in rows),
        )
        written.append(p.name)

    fam = ctx.family
    rows_f, rows_F = [], []
    for t, x in residual_probes(ctx):
        rd = density.integral_eq_residual_density(fam, t, x)
        rc = density.integral_eq_residual_cdf(fam, t, x)
        rows_f.append([t, x, rd, fam.pdf_se(t, x)])
        F = float(fam.cdf(t, x))
        rows_F.append([t, x, rc, math.sqrt(max(F * (1 - F), 0.0) / fam.n_samples)])
    for name, rows in (("residuals_density.csv", rows_f), ("residuals_cdf.csv", rows_F)):
        p = write_csv(out_dir / name, ["t", "x", "value", "std_err"], rows)
        written.append(p.name)

    co = ctx.coeffs
    p = write_csv(
        out_dir / "series_coeffs.csv", ["k", "c_value", "c_err", "n_samples"],
        ([int(k), float(c), float(e), co.n_samples] for k, c, e in zip(co.ks, co.c_values, co.c_errs)),
    )
    written.append(p.name)

    table = ctx.mgf_table
    stride = max(len(table.thetas) // 400, 1)
    p = write_csv(
        out_dir / "mgf_table.csv", ["theta", "log_m", "m"],
        (
            [float(th), float(lm), float(math.exp(min(lm, 700.0)))]
            for th, lm in zip(table.thetas[::stride], table.log_values[::stride])
        ),
    )
    written.append(p.name)

    data = ctx.rate_data
    p = write_csv(
        out_dir / "rate_table.csv", ["n", "delta", "d1", "dks", "bound"],
        ([r["n"], r["delta"], r["d1"], r["dks"], r["bound"]] for r in data["rows"]),
    )
    written.append(p.name)
    return written
