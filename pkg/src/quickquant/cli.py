"""Command-line surface.

Subcommands: simulate, density, dickman, tails, series, converge, validate.
Every run resolves its configuration from defaults < config file < flags,
emits CSV/JSON outputs plus a manifest (full config, seed, versions, wall
time), and renders a companion PNG next to each CSV unless --no-figures
(validate never renders).  Exit codes: 0 ok, 1 failed validation, 2 usage
error, 3 numerical guard violation.

Config files are plain key=value lines (keys match the long flag names,
hyphens or underscores); command-line flags win.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, convergence, density, exact, tails, validate
from .process import (
    rank_for_quantile,
    sample_selection_chain_values,
    sample_j_values,
    sample_quickselect_counts,
    sample_quickval_counts,
)
from .report import write_csv, write_json, write_manifest, checks_to_json
from .rng import DEFAULT_SEED, UniformStream

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed (default 0xC0FFEE)")
    p.add_argument("--workers", type=int, default=1, help="process workers; output is worker-count independent")
    p.add_argument("--trunc-eps", type=float, default=1e-8, help="path truncation width")
    p.add_argument("--config", type=str, default=None, help="key=value config file (flags win)")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="quickquant",
        description="Numerical laboratory for the limiting QuickSelect/QuickQuant comparison cost.",
    )
    ap.add_argument("--version", action="version", version=f"quickquant {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo summaries of the coupled constructions")
    p.add_argument("kind", choices=["interval", "quickselect", "quickval", "chain", "perpetuity"])
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--out", type=str, default="simulate.json")
    _add_common(p)

    p = sub.add_parser("density", help="mixture Monte Carlo estimate of the limit density")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x-min", type=float, default=0.0)
    p.add_argument("--x-max", type=float, default=6.0)
    p.add_argument("--points", type=int, default=241)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--out", type=str, default="density.csv")
    _add_common(p)

    p = sub.add_parser("dickman", help="Dickman density/CDF of J(0) by delay-equation march")
    p.add_argument("--x-max", type=float, default=8.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--points", type=int, default=321)
    p.add_argument("--out", type=str, default="dickman.csv")
    _add_common(p)

    p = sub.add_parser("tails", help="perpetuity mgf table, bound check, Chernoff envelopes")
    p.add_argument("--theta-max", type=float, default=4.0)
    p.add_argument("--grid-step", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--x-list", type=str, default="3,4,5,6,8,10")
    p.add_argument("--out", type=str, default="mgf_table.csv")
    _add_common(p)

    p = sub.add_parser("series", help="left-tail power-series coefficients")
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--out", type=str, default="series_coeffs.csv")
    _add_common(p)

    p = sub.add_parser("converge", help="finite-n convergence rates and large-deviation report")
    p.add_argument("--t", type=float, default=0.3)
    p.add_argument("--n-list", type=str, default="100,1000,10000")
    p.add_argument("--reps-list", type=str, default="100000,100000,30000")
    p.add_argument("--limit-samples", type=int, default=1_000_000)
    p.add_argument("--c", type=float, default=1.5, help="lower end of the large-deviation window")
    p.add_argument("--omega", type=float, default=0.5)
    p.add_argument("--out", type=str, default="rate_table.csv")
    _add_common(p)

    p = sub.add_parser("validate", help="run the validation suite")
    p.add_argument("--suite", choices=["all", "quick"], default="all")
    p.add_argument("--out-dir", type=str, default="validate_out")
    _add_common(p)

    return ap


def _load_config_tokens(argv: list[str]) -> list[str]:
    """Expand `--config FILE` into flag tokens placed before the real flags."""
    if "--config" not in argv:
        return []
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        print("usage error: --config needs a file argument", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    path = Path(argv[idx + 1])
    if not path.is_file():
        print(f"usage error: config file not found: {path}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    tokens = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key = key.strip().replace("_", "-")
        value = value.strip()
        if value.lower() in ("true", "yes"):
            tokens.append(f"--{key}")
        elif value.lower() in ("false", "no"):
            continue
        else:
            tokens.extend([f"--{key}", value])
    return tokens


def _parse(argv: list[str]) -> argparse.Namespace:
    ap = build_parser()
    if not argv:
        ap.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)
    head = [argv[0]]
    rest = argv[1:]
    if argv[0] == "simulate" and rest and not rest[0].startswith("-"):
        head.append(rest.pop(0))
    tokens = _load_config_tokens(argv)
    return ap.parse_args(head + tokens + rest)


def _config_dict(args: argparse.Namespace) -> dict:
    skip = {"command", "config", "no_figures"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _summary_json(kind: str, draws: np.ndarray, extra: dict) -> dict:
    mean = float(np.mean(draws))
    se = float(np.std(draws, ddof=1) / math.sqrt(len(draws))) if len(draws) > 1 else 0.0
    return {
        "kind": kind,
        **extra,
        "reps": int(len(draws)),
        "mean": mean,
        "std_err": se,
        "four_se": 4.0 * se,
        "min": float(np.min(draws)),
        "max": float(np.max(draws)),
    }


def cmd_simulate(args) -> list[str]:
    rng = UniformStream(args.seed)
    if args.kind == "interval":
        draws = 1.0 + sample_j_values(args.t, args.reps, args.trunc_eps, rng, args.workers)
        summary = _summary_json("interval", draws, {"t": args.t, "statistic": "1 + J(t)"})
        summary["reference_mean"] = 2.0 + 2.0 * exact.entropy_h(args.t)
    elif args.kind == "quickselect":
        m = args.m if args.m is not None else rank_for_quantile(args.n, args.t)
        draws = sample_quickselect_counts(args.n, m, args.reps, rng, args.workers).astype(float)
        summary = _summary_json("quickselect", draws, {"n": args.n, "m": m, "statistic": "comparisons"})
        if args.n <= exact.ENUMERATION_CAP:
            summary["reference_mean"] = float(exact.expected_comparisons_exact(args.n, m))
    elif args.kind == "quickval":
        draws = sample_quickval_counts(args.n, args.t, args.reps, rng, args.workers) / args.n
        summary = _summary_json("quickval", draws, {"n": args.n, "t": args.t, "statistic": "comparisons / n"})
        summary["reference_mean"] = 2.0 + 2.0 * exact.entropy_h(args.t)
    elif args.kind == "chain":
        m = args.m if args.m is not None else rank_for_quantile(args.n, args.t)
        draws = sample_selection_chain_values(args.n, m, args.reps, rng, args.workers)
        summary = _summary_json("chain", draws, {"n": args.n, "m": m, "statistic": "sum(size-1)/n"})
        if args.n <= exact.ENUMERATION_CAP:
            summary["reference_mean"] = float(exact.expected_comparisons_exact(args.n, m)) / args.n
    else:  # perpetuity
        draws = tails.sample_V_batch(args.reps, args.trunc_eps, rng, args.workers)
        summary = _summary_json("perpetuity", draws, {"statistic": "V"})
        summary["reference_mean"] = 4.0
    out = Path(args.out)
    write_json(out, summary)
    print(f"{summary['kind']}: mean={summary['mean']!r} std_err={summary['std_err']!r} -> {out}")
    return [str(out)]


def cmd_density(args) -> list[str]:
    if args.points < 2:
        raise ValueError("need at least two grid points")
    xs = np.linspace(args.x_min, args.x_max, args.points)
    grid = density.estimate_density(
        args.t, xs, args.samples, args.trunc_eps, UniformStream(args.seed), args.workers
    )
    out = Path(args.out)
    write_csv(
        out, ["t", "x", "value", "std_err"],
        ([args.t, float(x), float(v), float(s)] for x, v, s in zip(grid.xs, grid.values, grid.std_errs)),
    )
    outputs = [str(out)]
    if not args.no_figures:
        from . import figures

        outputs.append(str(figures.density_figure(out, args.t, grid.xs, grid.values, grid.std_errs)))
    print(f"density t={args.t:g}: {args.points} points, sup={float(grid.values.max())!r} -> {out}")
    return outputs


def cmd_dickman(args) -> list[str]:
    xs = np.linspace(0.0, args.x_max, args.points)
    pdf = density.dickman_density(xs, args.step)
    cdf = density.dickman_cdf(xs, args.step)
    out = Path(args.out)
    write_csv(out, ["x", "density", "cdf"],
              ([float(x), float(p), float(c)] for x, p, c in zip(xs, pdf, cdf)))
    outputs = [str(out)]
    if not args.no_figures:
        from . import figures

        outputs.append(str(figures.dickman_figure(out, xs, pdf, cdf)))
    print(f"dickman: f(0)={float(pdf[0])!r} -> {out}")
    return outputs


def cmd_tails(args) -> list[str]:
    table = tails.mgf_v_solve(args.theta_max, args.grid_step, args.tol)
    out = Path(args.out)
    stride = max(len(table.thetas) // 1000, 1)
    write_csv(
        out, ["theta", "log_m", "m"],
        (
            [float(th), float(lm), float(math.exp(min(lm, 700.0)))]
            for th, lm in zip(table.thetas[::stride], table.log_values[::stride])
        ),
    )
    outputs = [str(out)]
    xs = _float_list(args.x_list)
    env_rows = []
    for x in xs:
        s, d = tails.chernoff_envelopes(x, table)
        env_rows.append([float(x), float(s), float(d)])
    env_path = out.with_name(out.stem + "_envelopes.csv")
    write_csv(env_path, ["x", "survival_bound", "density_bound"], env_rows)
    outputs.append(str(env_path))
    eps, a = validate.MGF_CONVENTION
    check_thetas = [th for th in (0.5, 1.0, 2.0, 3.0) if th <= args.theta_max]
    checks = [tails.mgf_bound_check(table, th, eps, a) for th in check_thetas]
    check_path = out.with_name(out.stem + "_bound_checks.json")
    write_json(check_path, checks_to_json(checks))
    outputs.append(str(check_path))
    if not args.no_figures:
        from . import figures

        outputs.append(str(figures.mgf_figure(out, table.thetas[::stride], table.log_values[::stride])))
        outputs.append(
            str(figures.envelope_figure(env_path, xs, [r[1] for r in env_rows], [r[2] for r in env_rows]))
        )
    print(f"tails: {table.iterations} sweeps, m(1)={float(table.m(1.0))!r} -> {out}")
    return outputs


def cmd_series(args) -> list[str]:
    pool = tails.build_series_pool(args.samples, args.trunc_eps, UniformStream(args.seed), args.workers)
    coeffs = tails.SeriesCoeffs.from_pool(pool, args.k_max)
    out = Path(args.out)
    write_csv(
        out, ["k", "c_value", "c_err", "n_samples"],
        ([int(k), float(c), float(e), pool.n] for k, c, e in zip(coeffs.ks, coeffs.c_values, coeffs.c_errs)),
    )
    outputs = [str(out)]
    if not args.no_figures:
        from . import figures

        outputs.append(str(figures.series_figure(out, coeffs.ks, coeffs.c_values, coeffs.c_errs)))
    print(f"series: c_1={float(coeffs.c_values[0])!r} +- {float(coeffs.c_errs[0])!r} -> {out}")
    return outputs


def cmd_converge(args) -> list[str]:
    rng = UniformStream(args.seed)
    n_list = _int_list(args.n_list)
    reps_list = _int_list(args.reps_list)
    if len(reps_list) != len(n_list):
        raise ValueError("--reps-list must match --n-list in length")
    z = sample_j_values(args.t, max(args.limit_samples, max(reps_list)), args.trunc_eps,
                        rng.substream(0), args.workers)
    data = convergence.rate_table(args.t, n_list, reps_list, z, rng.substream(1), args.workers)
    out = Path(args.out)
    write_csv(
        out, ["n", "delta", "d1", "dks", "bound"],
        ([r["n"], r["delta"], r["d1"], r["dks"], r["bound"]] for r in data["rows"]),
    )
    outputs = [str(out)]
    # large-deviation report at the largest n
    n = n_list[-1]
    m = rank_for_quantile(n, args.t)
    d = convergence.delta_nt(n, args.t, m)
    iv = convergence.ld_interval(n, args.t, args.c, args.omega)
    counts = sample_quickselect_counts(n, m, reps_list[-1], rng.substream(2), args.workers)
    ratios = []
    if not convergence.interval_is_empty(iv):
        for x in np.linspace(iv[0], iv[1], 3):
            try:
                p1, p2, ratio, se = convergence.ld_ratio_check(float(x), counts / n, z + 1.0)
            except ValueError:
                continue
            ratios.append((float(x), p1, p2, ratio))
    report = convergence.LdReport(t=args.t, n=n, m_n=m, delta=d, interval=iv, ratios=ratios)
    ld_path = out.with_name(out.stem + "_ld.json")
    write_json(ld_path, report.to_dict())
    outputs.append(str(ld_path))
    if not args.no_figures:
        from . import figures

        rows = data["rows"]
        outputs.append(
            str(figures.rate_figure(out, [r["n"] for r in rows], [r["d1"] for r in rows],
                                    [r["dks"] for r in rows], [r["bound"] for r in rows]))
        )
    print(f"converge t={args.t:g}: fitted K={data['K']!r}, A={data['A']!r} -> {out}")
    return outputs


def cmd_validate(args) -> tuple[list[str], bool]:
    out_dir = Path(args.out_dir)
    result = validate.run_suite(
        suite=args.suite, seed=args.seed, workers=args.workers, out_dir=out_dir, echo=print
    )
    n_fail = sum(not c.passed for c in result.checks)
    print(f"suite '{args.suite}': {len(result.checks)} checks, {n_fail} failed")
    return [str(out_dir / "checks.json")], result.all_passed


def main(argv: list[str] | None = None) -> int:
    args = _parse(sys.argv[1:] if argv is None else argv)
    start = time.time()
    ok = True
    try:
        if args.command == "simulate":
            outputs = cmd_simulate(args)
        elif args.command == "density":
            outputs = cmd_density(args)
        elif args.command == "dickman":
            outputs = cmd_dickman(args)
        elif args.command == "tails":
            outputs = cmd_tails(args)
        elif args.command == "series":
            outputs = cmd_series(args)
        elif args.command == "converge":
            outputs = cmd_converge(args)
        else:
            outputs, ok = cmd_validate(args)
    except (ValueError, RuntimeError) as err:
        print(f"numerical guard violation: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    manifest_path = (
        Path(args.out_dir) / "manifest.json"
        if args.command == "validate"
        else Path(args.out).with_suffix("").with_name(Path(args.out).stem + ".manifest.json")
    )
    write_manifest(manifest_path, args.command, _config_dict(args), outputs, time.time() - start)
    return EXIT_OK if ok else EXIT_VALIDATION_FAILED


if __name__ == "__main__":
    sys.exit(main())
