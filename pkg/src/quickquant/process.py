"""Coupled uniform-key constructions.

One shared sequence of Uniform(0,1) keys drives three objects:

  * the limiting nested-interval process around a quantile t, whose summed
    widths give Z(t) = 1 + J(t);
  * finite-n QuickSelect / QuickVal comparison counts, realized both by the
    interval recursion and by direct stable partitioning (the two counts
    are asserted equal);
  * the selection Markov chain on (size, rank) states whose summed sizes
    reproduce the law of the normalized comparison count.

Pivots for the limit process are drawn uniformly on the current interval
rather than by rejection from the key sequence; the two are identical in
law and the direct draw avoids unbounded rejection loops as the interval
shrinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .rng import UniformStream, chunk_sizes
from .parallel import run_tasks

DEFAULT_TRUNC_EPS = 1e-8

# Stopping at width < eps leaves E[tail | width] = width * E Z(t') bounded by
# (2 + 2 ln 2) * eps, since E Z peaks at t = 1/2.
TRUNCATION_BIAS_FACTOR = 2.0 + 2.0 * math.log(2.0)

_PATH_CAP = 10_000  # interval width shrinks geometrically; never reached


@dataclass(frozen=True)
class IntervalPath:
    """One truncated realization of the nested search intervals at t."""

    t: float
    pairs: tuple[tuple[float, float], ...]
    j_value: float
    trunc_eps: float
    steps: int

    @property
    def bias_bound(self) -> float:
        return TRUNCATION_BIAS_FACTOR * self.trunc_eps


@dataclass(frozen=True)
class SelectTrace:
    """Outcome of one QuickSelect(n, m) run under the coupled construction."""

    n: int
    m: int
    comparisons: int
    pivot_ranks: tuple[int, ...]


def simulate_interval_process(
    t: float, trunc_eps: float = DEFAULT_TRUNC_EPS, rng: UniformStream | None = None
) -> IntervalPath:
    """Draw one interval path at quantile t, truncated at width < trunc_eps."""
    _check_t(t)
    _check_eps(trunc_eps)
    gen = _gen(rng)
    ls, rs, j = _kernels.interval_path_arrays(gen, t, trunc_eps, _PATH_CAP)
    return IntervalPath(
        t=t,
        pairs=tuple(zip(ls.tolist(), rs.tolist())),
        j_value=float(j),
        trunc_eps=trunc_eps,
        steps=len(ls),
    )


def sample_j_values(
    t: float,
    n_samples: int,
    trunc_eps: float = DEFAULT_TRUNC_EPS,
    rng: UniformStream | None = None,
    workers: int = 1,
) -> np.ndarray:
    """n_samples independent truncated draws of J(t), chunk-deterministic."""
    _check_t(t)
    _check_eps(trunc_eps)
    rng = rng if rng is not None else UniformStream(0)
    tasks = [
        (rng.substream(c), t, trunc_eps, size)
        for c, size in enumerate(chunk_sizes(n_samples))
    ]
    parts = run_tasks(_j_chunk, tasks, workers)
    return np.concatenate(parts) if parts else np.empty(0)


def _j_chunk(args):
    stream, t, eps, size = args
    return _kernels.interval_j_batch(stream.generator(), t, eps, size)


def simulate_quickselect(n: int, m: int, rng: UniformStream | None = None) -> SelectTrace:
    """One QuickSelect(n, m) run counted two ways; the counts must agree.

    (a) the coupled interval recursion over the key sequence and (b) direct
    stable partitioning of the induced arrival order.  A mismatch signals
    an implementation bug and raises.
    """
    _check_rank(n, m)
    gen = _gen(rng)
    u = gen.random(n)
    coupled, ranks = _kernels.quickselect_coupled(u, m)
    direct = _kernels.quickselect_count_values(u, m, np.empty(n), np.empty(n), np.empty(n))
    if coupled != direct:
        raise RuntimeError(
            f"coupled/direct comparison counts disagree: {coupled} != {direct} (n={n}, m={m})"
        )
    return SelectTrace(n=n, m=m, comparisons=int(coupled), pivot_ranks=tuple(int(r) for r in ranks))


def sample_quickselect_counts(
    n: int, m: int, reps: int, rng: UniformStream | None = None, workers: int = 1
) -> np.ndarray:
    """reps independent QuickSelect(n, m) comparison counts (direct method)."""
    _check_rank(n, m)
    rng = rng if rng is not None else UniformStream(0)
    tasks = [
        (rng.substream(c), n, m, size)
        for c, size in enumerate(chunk_sizes(reps, 50_000))
    ]
    parts = run_tasks(_qs_chunk, tasks, workers)
    return np.concatenate(parts) if parts else np.empty(0, np.int64)


def _qs_chunk(args):
    stream, n, m, size = args
    return _kernels.quickselect_batch(stream.generator(), n, m, size)


def simulate_quickval(n: int, t: float, rng: UniformStream | None = None) -> int:
    """QuickVal(n, t) comparison count (pivot-vs-t comparisons not counted)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_t(t)
    gen = _gen(rng)
    return int(_kernels.quickval_count_values(gen.random(n), t))


def sample_quickval_counts(
    n: int, t: float, reps: int, rng: UniformStream | None = None, workers: int = 1
) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_t(t)
    rng = rng if rng is not None else UniformStream(0)
    tasks = [
        (rng.substream(c), n, t, size)
        for c, size in enumerate(chunk_sizes(reps, 50_000))
    ]
    parts = run_tasks(_qv_chunk, tasks, workers)
    return np.concatenate(parts) if parts else np.empty(0, np.int64)


def _qv_chunk(args):
    stream, n, t, size = args
    return _kernels.quickval_batch(stream.generator(), n, t, size)


def simulate_selection_chain(n: int, m: int, rng: UniformStream | None = None) -> float:
    """One run of the selection Markov chain; returns n^-1 sum (size_k - 1)."""
    _check_rank(n, m)
    return float(_kernels.selection_chain_value(_gen(rng), n, m))


def sample_selection_chain_values(
    n: int, m: int, reps: int, rng: UniformStream | None = None, workers: int = 1
) -> np.ndarray:
    _check_rank(n, m)
    rng = rng if rng is not None else UniformStream(0)
    tasks = [
        (rng.substream(c), n, m, size)
        for c, size in enumerate(chunk_sizes(reps))
    ]
    parts = run_tasks(_selection_chain_chunk, tasks, workers)
    return np.concatenate(parts) if parts else np.empty(0)


def _selection_chain_chunk(args):
    stream, n, m, size = args
    return _kernels.selection_chain_batch(stream.generator(), n, m, size)


def rank_for_quantile(n: int, t: float) -> int:
    """The rank sequence m_n(t) = floor(n t) + 1 (m_n(1) = n)."""
    if t >= 1.0:
        return n
    return int(math.floor(n * t)) + 1


def _gen(rng: UniformStream | None) -> np.random.Generator:
    return (rng if rng is not None else UniformStream(0)).generator()


def _check_t(t: float) -> None:
    if not 0.0 <= t <= 1.0:
        raise ValueError("quantile t must lie in [0, 1]")


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise ValueError("trunc_eps must lie in (0, 1)")


def _check_rank(n: int, m: int) -> None:
    if n < 1:
        raise ValueError("list size n must be >= 1")
    if not 1 <= m <= n:
        raise ValueError(f"rank m={m} out of range 1..{n}")
