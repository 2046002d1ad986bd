"""Numba kernels for the Monte Carlo and fixed-point hot loops.

Everything here is scalar-loop code compiled with numba so that 1e6-1e7
replicate budgets run in seconds.  Generators are numpy Generator objects
(PCG64); numba advances their state in place, so a kernel's output is a
pure function of (stream state, arguments).

The conditional-density formulas are duplicated here in scalar form for the
mixture estimator's inner loop; conditional.py holds the vectorized
reference implementations and the tests pin the two against each other.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


# ----------------------------------------------------------------------------
# Nested search-interval process
# ----------------------------------------------------------------------------

@njit(**_JIT)
def interval_j(gen, t, eps):
    """One truncated realization of J(t): sum of nested interval widths."""
    L = 0.0
    R = 1.0
    s = 0.0
    while R - L >= eps:
        p = L + (R - L) * gen.random()
        if p <= t:
            L = p
        else:
            R = p
        s += R - L
    return s


@njit(**_JIT)
def interval_j_batch(gen, t, eps, n):
    out = np.empty(n)
    for i in range(n):
        out[i] = interval_j(gen, t, eps)
    return out


@njit(**_JIT)
def interval_j_at_quantiles(gen, w, eps):
    """One truncated J(w_i) draw per entry of the quantile array w."""
    n = w.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = interval_j(gen, w[i], eps)
    return out


@njit(**_JIT)
def interval_path_arrays(gen, t, eps, cap):
    """Record the (L_k, R_k) pairs of one truncated path."""
    Ls = np.empty(cap)
    Rs = np.empty(cap)
    L = 0.0
    R = 1.0
    s = 0.0
    k = 0
    while R - L >= eps and k < cap:
        p = L + (R - L) * gen.random()
        if p <= t:
            L = p
        else:
            R = p
        s += R - L
        Ls[k] = L
        Rs[k] = R
        k += 1
    return Ls[:k].copy(), Rs[:k].copy(), s


@njit(**_JIT)
def pivot_triple(gen, t):
    """Three interval steps; returns (l3, r3, width1 + width2)."""
    L = 0.0
    R = 1.0
    d12 = 0.0
    for k in range(3):
        p = L + (R - L) * gen.random()
        if p <= t:
            L = p
        else:
            R = p
        if k < 2:
            d12 += R - L
    return L, R, d12


@njit(**_JIT)
def triple_mixture_batch(gen, t, eps, n):
    """Replicate pool for the mixture estimator.

    Per replicate: pivot pair (l3, r3) after three steps, the tail
    Y = (r3-l3) * (1 + J((t-l3)/(r3-l3))) from a fresh truncated path, and
    the implied full draw j = width1 + width2 + Y which is distributed as
    J(t) up to truncation bias.
    """
    l3 = np.empty(n)
    r3 = np.empty(n)
    y = np.empty(n)
    j = np.empty(n)
    for i in range(n):
        L, R, d12 = pivot_triple(gen, t)
        tp = (t - L) / (R - L)
        yy = (R - L) * (1.0 + interval_j(gen, tp, eps))
        l3[i] = L
        r3[i] = R
        y[i] = yy
        j[i] = d12 + yy
    return l3, r3, y, j


# ----------------------------------------------------------------------------
# Conditional density of width1 + width2 given (l3, r3), scalar forms
# ----------------------------------------------------------------------------

@njit(**_JIT)
def g_pair_density(l, r):
    """Joint density of an interior pivot pair (l3, r3)."""
    term1 = (1.0 / (l * (1.0 - l)) + 1.0 / (r * (1.0 - r))) * (-np.log(r - l))
    term2 = (1.0 / l + 1.0 / (1.0 - r)) * (np.log(r) + np.log(1.0 - l))
    return term1 + term2


@njit(**_JIT)
def cond_pdf_interior_given_g(l, r, g, x):
    """Six-piece interior conditional density, indicators [lo, hi)."""
    s = 0.0
    if 2.0 - 2.0 * l <= x < 2.0 - l:
        s += 1.0 / ((1.0 - l) * (x - 1.0 + l))
    if 2.0 * r <= x < 1.0 + r:
        s += 1.0 / (r * (x - r))
    if 1.0 + r - 2.0 * l <= x < 1.0 + r:
        s += 2.0 / ((x + 1.0 - r) * (x + r - 1.0))
    if 2.0 * r - l <= x < 2.0 - l:
        s += 2.0 / ((x + l) * (x - l))
    if 2.0 * r - l <= x < 2.0 * r:
        s += 1.0 / (r * (x - r))
    if 1.0 + r - 2.0 * l <= x < 2.0 - 2.0 * l:
        s += 1.0 / ((1.0 - l) * (x - 1.0 + l))
    return s / g


@njit(**_JIT)
def cond_pdf_left_boundary(r, x):
    """Conditional density when l3 = 0 (support [2 r3, 2))."""
    if x < 2.0 * r or x >= 2.0:
        return 0.0
    c = 2.0 / (np.log(r) * np.log(r)) / x
    if x < 1.0 + r:
        return c * np.log((x - r) / r)
    return c * (-np.log(x - 1.0))


@njit(**_JIT)
def cond_pdf_right_boundary(l, x):
    """Conditional density when r3 = 1 (support [2-2*l3, 2))."""
    if x < 2.0 - 2.0 * l or x >= 2.0:
        return 0.0
    q = 1.0 - l
    c = 2.0 / (np.log(q) * np.log(q)) / x
    if x < 2.0 - l:
        return c * np.log((x - 1.0 + l) / q)
    return c * (-np.log(x - 1.0))


@njit(**_JIT)
def cond_pdf(l, r, x):
    if l == 0.0:
        return cond_pdf_left_boundary(r, x)
    if r == 1.0:
        return cond_pdf_right_boundary(l, x)
    if x >= 2.0:
        return 0.0
    return cond_pdf_interior_given_g(l, r, g_pair_density(l, r), x)


@njit(**_JIT)
def density_accumulate(xs, l3, r3, y, vsum, vsumsq):
    """Add cond_pdf(l3_i, r3_i; x - y_i) into per-grid-point accumulators.

    Only the grid points inside the shifted support [lo + y, 2 + y) are
    touched, so grid points at or below min(t, 1-t) stay exactly zero.
    """
    n = l3.shape[0]
    for i in range(n):
        l = l3[i]
        r = r3[i]
        yy = y[i]
        if l == 0.0:
            lo = 2.0 * r
            g = 0.0
        elif r == 1.0:
            lo = 2.0 - 2.0 * l
            g = 0.0
        else:
            a = 2.0 * r - l
            b = 1.0 + r - 2.0 * l
            lo = a if a < b else b
            g = g_pair_density(l, r)
        i0 = np.searchsorted(xs, lo + yy, side="left")
        i1 = np.searchsorted(xs, 2.0 + yy, side="left")
        if l == 0.0:
            for k in range(i0, i1):
                f = cond_pdf_left_boundary(r, xs[k] - yy)
                vsum[k] += f
                vsumsq[k] += f * f
        elif r == 1.0:
            for k in range(i0, i1):
                f = cond_pdf_right_boundary(l, xs[k] - yy)
                vsum[k] += f
                vsumsq[k] += f * f
        else:
            for k in range(i0, i1):
                f = cond_pdf_interior_given_g(l, r, g, xs[k] - yy)
                vsum[k] += f
                vsumsq[k] += f * f


# ----------------------------------------------------------------------------
# Finite-n QuickSelect / QuickVal / Markov chain
# ----------------------------------------------------------------------------

@njit(**_JIT)
def quickselect_count_values(vals, m, small, big, cur):
    """Comparison count of first-arrival-pivot QuickSelect for rank m.

    vals is the arrival order; the partition is stable so the next pivot is
    again the earliest arrival of the surviving sublist.  Each partition
    step costs size-1 comparisons.
    """
    n = vals.shape[0]
    for i in range(n):
        cur[i] = vals[i]
    size = n
    k = m
    cnt = 0
    while size > 1:
        pivot = cur[0]
        nl = 0
        nb = 0
        for i in range(1, size):
            v = cur[i]
            if v < pivot:
                small[nl] = v
                nl += 1
            else:
                big[nb] = v
                nb += 1
        cnt += size - 1
        if k == nl + 1:
            break
        elif k <= nl:
            for i in range(nl):
                cur[i] = small[i]
            size = nl
        else:
            for i in range(nb):
                cur[i] = big[i]
            k -= nl + 1
            size = nb
    return cnt


@njit(**_JIT)
def quickselect_batch(gen, n, m, reps):
    out = np.empty(reps, np.int64)
    small = np.empty(n)
    big = np.empty(n)
    cur = np.empty(n)
    for r in range(reps):
        vals = gen.random(n)
        out[r] = quickselect_count_values(vals, m, small, big, cur)
    return out


@njit(**_JIT)
def quickselect_coupled(u, m):
    """Comparison count via the coupled interval recursion, plus pivot ranks.

    Pivots are drawn as the earliest arrival inside the current open
    interval; the interval endpoint moves according to the pivot's rank
    relative to m.  (The recursion's tau=inf branch is unreachable here:
    distinct uniforms never collapse the interval before absorption.)
    """
    n = u.shape[0]
    L = 0.0
    R = 1.0
    cnt = 0
    ranks = np.empty(n, np.int64)
    npiv = 0
    while True:
        tau = -1
        for i in range(n):
            if L < u[i] < R:
                tau = i
                break
        if tau < 0:
            break
        p = u[tau]
        rank = 1
        for i in range(n):
            if u[i] < p:
                rank += 1
        s = 0
        for i in range(tau + 1, n):
            if L < u[i] < R:
                s += 1
        cnt += s
        ranks[npiv] = rank
        npiv += 1
        if rank == m:
            break
        elif rank < m:
            L = p
        else:
            R = p
    return cnt, ranks[:npiv].copy()


@njit(**_JIT)
def quickval_count_values(u, t):
    """QuickVal comparison count sum_k S_{n,k}(t) for one arrival sequence."""
    n = u.shape[0]
    L = 0.0
    R = 1.0
    cnt = 0
    tau = -1
    while True:
        nxt = -1
        for i in range(tau + 1, n):
            if L <= u[i] <= R:
                nxt = i
                break
        if nxt < 0:
            break
        s = 0
        for i in range(nxt + 1, n):
            if L < u[i] < R:
                s += 1
        cnt += s
        p = u[nxt]
        if p <= t:
            L = p
        else:
            R = p
        tau = nxt
    return cnt


@njit(**_JIT)
def quickval_batch(gen, n, t, reps):
    out = np.empty(reps, np.int64)
    for r in range(reps):
        u = gen.random(n)
        out[r] = quickval_count_values(u, t)
    return out


@njit(**_JIT)
def selection_chain_value(gen, n, m):
    """One run of the selection Markov chain from (n, m) to absorption.

    Transition: uniform pivot rank p in 1..i maps (i, j) to (i-p, j-p) for
    p < j, to the absorbing (1,1) for p = j, and to (p-1, j) for p > j.
    Returns sum of (size - 1) over visited states, divided by n.
    """
    i = n
    j = m
    acc = 0.0
    while not (i == 1 and j == 1):
        acc += i - 1
        p = int(gen.integers(1, i + 1))
        if p == j:
            i = 1
            j = 1
        elif p < j:
            i -= p
            j -= p
        else:
            i = p - 1
    return acc / n


@njit(**_JIT)
def selection_chain_batch(gen, n, m, reps):
    out = np.empty(reps)
    for r in range(reps):
        out[r] = selection_chain_value(gen, n, m)
    return out


# ----------------------------------------------------------------------------
# Exhaustive permutation enumeration (exact oracle)
# ----------------------------------------------------------------------------

@njit(**_JIT)
def perm_stats(perms):
    """Totals of C_{n,m} and worst-case counts over all given permutations.

    perms holds arrival orders of the ranks 1..n, one per row.  Returns
    (totals, worst) indexed by m-1: totals[m-1] = sum over rows of the
    QuickSelect(n, m) comparison count, worst[m-1] = number of rows whose
    count equals n(n-1)/2.
    """
    nperm, n = perms.shape
    totals = np.zeros(n, np.int64)
    worst = np.zeros(n, np.int64)
    maxc = n * (n - 1) // 2
    small = np.empty(n, np.int64)
    big = np.empty(n, np.int64)
    cur = np.empty(n, np.int64)
    for pi in range(nperm):
        for m in range(1, n + 1):
            for i in range(n):
                cur[i] = perms[pi, i]
            size = n
            k = m
            cnt = 0
            while size > 1:
                pivot = cur[0]
                nl = 0
                nb = 0
                for i in range(1, size):
                    v = cur[i]
                    if v < pivot:
                        small[nl] = v
                        nl += 1
                    else:
                        big[nb] = v
                        nb += 1
                cnt += size - 1
                if k == nl + 1:
                    break
                elif k <= nl:
                    for i in range(nl):
                        cur[i] = small[i]
                    size = nl
                else:
                    for i in range(nb):
                        cur[i] = big[i]
                    k -= nl + 1
                    size = nb
            totals[m - 1] += cnt
            if cnt == maxc:
                worst[m - 1] += 1
    return totals, worst


# ----------------------------------------------------------------------------
# Perpetuity upper bound V and its moment generating function
# ----------------------------------------------------------------------------

@njit(**_JIT)
def perpetuity_batch(gen, eps, n):
    """Draws of V = 1 + sum of running products of Uniform(1/2,1) factors."""
    out = np.empty(n)
    for i in range(n):
        total = 1.0
        prod = 1.0
        while True:
            prod *= 0.5 + 0.5 * gen.random()
            if prod < eps:
                break
            total += prod
        out[i] = total
    return out


@njit(**_JIT)
def _simpson_cell_exp(m0, m1, w, peak):
    """Simpson cell of exp(M) with M linear on the cell, shifted by peak."""
    mm = 0.5 * (m0 + m1)
    return (w / 6.0) * (np.exp(m0 - peak) + 4.0 * np.exp(mm - peak) + np.exp(m1 - peak))


@njit(**_JIT)
def mgf_log_fixed_point(thetas, tol, max_iter):
    """Solve m(th) = 2 e^th * (1/th) * int_{th/2}^{th} m(s) ds on a grid.

    Works on M = log m (m grows like exp(c e^th / th), so m itself
    overflows well below the th <= 8 guard); the integral is a per-cell
    Simpson rule of exp(M) with M interpolated linearly, stabilized by
    subtracting the peak M(th).  In-place ascending sweeps; each node's
    update uses already-updated values below it and last sweep's value at
    the self-referential s = th endpoint, so this is still pure fixed-point
    iteration started from m = 1.  Returns (M, sweeps); sweeps = -1 flags
    non-convergence.
    """
    npts = thetas.shape[0]
    h = thetas[1] - thetas[0]
    M = np.zeros(npts)
    for sweep in range(1, max_iter + 1):
        delta = 0.0
        for jx in range(1, npts):
            th = thetas[jx]
            a = 0.5 * th
            ia = int(np.ceil(a / h - 1e-9))
            if ia < 1:
                ia = 1
            peak = M[jx]
            # partial cell [a, thetas[ia]] with M(a) linearly interpolated
            ma = M[ia - 1] + (M[ia] - M[ia - 1]) * (a / h - (ia - 1))
            acc = _simpson_cell_exp(ma, M[ia], thetas[ia] - a, peak)
            for k in range(ia, jx):
                acc += _simpson_cell_exp(M[k], M[k + 1], h, peak)
            mnew = th + np.log(2.0 * acc / th) + peak
            d = abs(mnew - M[jx])
            if d > delta:
                delta = d
            M[jx] = mnew
        if delta < tol:
            return M, sweep
    return M, -1
