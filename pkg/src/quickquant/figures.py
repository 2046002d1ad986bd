"""Matplotlib rendering of the report tables.

Each CSV a report command emits can get a companion PNG next to it; the
delimited files stay the canonical output and the validate path never
renders.  Uses the Agg backend so no display is needed.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

DPI = 150


def _save(fig, csv_path: Path) -> Path:
    out = Path(csv_path).with_suffix(".png")
    fig.savefig(out, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    return out


def density_figure(csv_path, t, xs, values, std_errs) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(xs, values, lw=1.2, label=rf"$\hat f_t$, $t={t:g}$")
    ax.fill_between(xs, values - 2 * std_errs, values + 2 * std_errs,
                    alpha=0.3, lw=0, label=r"$\pm 2$ SE")
    ax.axvline(min(t, 1 - t), color="k", ls=":", lw=0.8, label=r"$\min(t,1-t)$")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend(frameon=False)
    return _save(fig, csv_path)


def dickman_figure(csv_path, xs, pdf, cdf) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(xs, pdf, lw=1.2, label=r"$f_0(x) = e^{-\gamma}\rho(x)$")
    ax.plot(xs, cdf, lw=1.2, ls="--", label=r"$F_0(x)$")
    ax.set_xlabel("x")
    ax.legend(frameon=False)
    return _save(fig, csv_path)


def mgf_figure(csv_path, thetas, log_values) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(thetas, log_values, lw=1.2)
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel(r"$\ln m(\theta)$")
    return _save(fig, csv_path)


def envelope_figure(csv_path, xs, survival, density) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.semilogy(xs, survival, lw=1.2, label="survival envelope")
    ok = [d == d for d in density]  # NaN below x=3
    ax.semilogy([x for x, k in zip(xs, ok) if k], [d for d, k in zip(density, ok) if k],
                lw=1.2, ls="--", label="density envelope")
    ax.set_xlabel("x")
    ax.legend(frameon=False)
    return _save(fig, csv_path)


def series_figure(csv_path, ks, c_values, c_errs) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.errorbar(ks, c_values, yerr=3 * c_errs, fmt="o-", ms=3, lw=1, capsize=2,
                label=r"$\hat c_k$")
    upper = [2.0 ** -(k + 1) / k * (1 + 2.0**-k) for k in ks]
    lower = [7e-4 * 2.0 ** -(k + 1) / (k + 1) ** 2 for k in ks]
    ax.plot(ks, upper, "k:", lw=0.8, label="bounds")
    ax.plot(ks, lower, "k:", lw=0.8)
    ax.set_yscale("log")
    ax.set_xlabel("k")
    ax.legend(frameon=False)
    return _save(fig, csv_path)


def rate_figure(csv_path, ns, d1s, dkss, bounds) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.loglog(ns, d1s, "o-", ms=4, lw=1, label=r"$\hat d_1$")
    ax.loglog(ns, dkss, "s-", ms=4, lw=1, label=r"$\hat d_{KS}$")
    ax.loglog(ns, bounds, "k:", lw=0.8, label=r"$\delta_n \ln \delta_n^{-1}$")
    ax.set_xlabel("n")
    ax.legend(frameon=False)
    return _save(fig, csv_path)
