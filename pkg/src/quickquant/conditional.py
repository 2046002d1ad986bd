"""Closed-form conditional densities of the first two interval widths.

Conditional on the third pivot pair (l3, r3), the sum X of the first two
interval widths has an explicit density: a two-piece logarithmic form when
one endpoint never moved (l3 = 0 or r3 = 1) and a six-piece rational form
in the interior.  The ratio rho = l3/(1-r3) classifies the ordering of the
six support endpoints and selects between two equivalent regroupings of the
interior formula; constant upper bounds b(l3, r3) (interior) and b_t
(boundary, with the knee at beta = 1/alpha) dominate the densities.

Indicator pieces are evaluated on [lo, hi), making every density right
continuous; all densities vanish for x >= 2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .rng import UniformStream
from . import _kernels


class RhoClass(enum.Enum):
    """Ordering class of the six support endpoints, by rho = l3/(1-r3)."""

    ZERO = "zero"          # l3 = 0
    LO = "lo"              # rho in (0, 1/2)
    MID = "mid"            # rho in [1/2, 1)
    HI = "hi"              # rho in [1, 2)
    TOP = "top"            # rho in [2, inf)
    INFINITE = "infinite"  # r3 = 1


def _solve_alpha() -> float:
    # Unique real root of 1 + x - x ln x = 0; Newton from bisection bracket.
    x = 3.6
    for _ in range(60):
        f = 1.0 + x - x * math.log(x)
        fp = -math.log(x)
        step = f / fp
        x -= step
        if abs(step) < 1e-15:
            break
    return x


ALPHA = _solve_alpha()
BETA = 1.0 / ALPHA

# The root must be exact to double precision; everything downstream relies on it.
assert abs(1.0 + ALPHA - ALPHA * math.log(ALPHA)) < 1e-12
assert abs(ALPHA * BETA - 1.0) < 1e-14


@dataclass(frozen=True)
class AlphaBeta:
    alpha: float = ALPHA
    beta: float = BETA


@dataclass(frozen=True)
class PivotTriple:
    """Pivot pair (l3, r3) around quantile t with its endpoint-order class."""

    t: float
    l3: float
    r3: float
    rho_class: RhoClass = None  # type: ignore[assignment]

    def __post_init__(self):
        if not (0.0 <= self.l3 <= self.t <= self.r3 <= 1.0) or self.l3 >= self.r3:
            raise ValueError(f"invalid pivot pair (l3={self.l3}, r3={self.r3}) for t={self.t}")
        if self.l3 == 0.0 and self.r3 == 1.0:
            raise ValueError("degenerate pivot pair (0, 1)")
        if 0.0 < self.t < 1.0 and not (self.l3 < self.t < self.r3):
            raise ValueError("interior t requires l3 < t < r3")
        if self.rho_class is None:
            object.__setattr__(self, "rho_class", rho_class(self.l3, self.r3)[0])

    @property
    def is_boundary(self) -> bool:
        return self.l3 == 0.0 or self.r3 == 1.0

    def reflected(self) -> "PivotTriple":
        return PivotTriple(1.0 - self.t, 1.0 - self.r3, 1.0 - self.l3)


def support_endpoints(l: float, r: float) -> np.ndarray:
    """The six interior piece endpoints {2r-l, 2r, 1+r-2l, 1+r, 2-2l, 2-l}."""
    return np.array([2 * r - l, 2 * r, 1 + r - 2 * l, 1 + r, 2 - 2 * l, 2 - l])


# Symbolic endpoint orders per class, as expressions of (l, r).  Both the
# pairs (2r, 2-l) and (2r-l, 2-2l) trade places as rho crosses 2 (each
# equality is 2r + l = 2), so the TOP order differs from HI in two swaps.
_CLASS_ORDERS = {
    RhoClass.LO: ("2r-l", "2r", "1+r-2l", "1+r", "2-2l", "2-l"),
    RhoClass.MID: ("2r-l", "1+r-2l", "2r", "2-2l", "1+r", "2-l"),
    RhoClass.HI: ("1+r-2l", "2r-l", "2-2l", "2r", "2-l", "1+r"),
    RhoClass.TOP: ("1+r-2l", "2-2l", "2r-l", "2-l", "2r", "1+r"),
}


def endpoint_order(rho_cls: RhoClass) -> tuple[str, ...]:
    """Symbolic endpoint order for an interior class."""
    return _CLASS_ORDERS[rho_cls]


def rho_class(l: float, r: float) -> tuple[RhoClass, np.ndarray]:
    """Class of rho = l/(1-r) plus the sorted interior endpoints.

    Boundary values of rho (1/2, 1, 2) are assigned to the upper class;
    they are not attained by the sampler with positive probability.
    """
    if not (0.0 <= l < r <= 1.0):
        raise ValueError("need 0 <= l < r <= 1")
    if l == 0.0 and r == 1.0:
        raise ValueError("degenerate pair (0, 1)")
    if l == 0.0:
        return RhoClass.ZERO, np.array([2 * r, 1 + r, 2.0])
    if r == 1.0:
        return RhoClass.INFINITE, np.array([2 - 2 * l, 2 - l, 2.0])
    rho = l / (1.0 - r)
    if rho < 0.5:
        cls = RhoClass.LO
    elif rho < 1.0:
        cls = RhoClass.MID
    elif rho < 2.0:
        cls = RhoClass.HI
    else:
        cls = RhoClass.TOP
    return cls, np.sort(support_endpoints(l, r))


def g_density(l: float, r: float) -> float:
    """Joint density g(l3, r3) of an interior pivot pair.

    Satisfies the reflection symmetry g(l, r) = g(1-r, 1-l).
    """
    if not (0.0 < l < r < 1.0):
        raise ValueError("need 0 < l < r < 1")
    return (1.0 / (l * (1.0 - l)) + 1.0 / (r * (1.0 - r))) * math.log(1.0 / (r - l)) - (
        1.0 / l + 1.0 / (1.0 - r)
    ) * (math.log(1.0 / r) + math.log(1.0 / (1.0 - l)))


def _piece(x, lo, hi, values):
    return np.where((lo <= x) & (x < hi), values, 0.0)


def _pdf_left_boundary(r: float, x: np.ndarray) -> np.ndarray:
    c = 2.0 / math.log(1.0 / r) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        lo_piece = np.where(
            (2 * r <= x) & (x < 1 + r), np.log(np.maximum(x - r, 1e-300) / r), 0.0
        )
        hi_piece = np.where((1 + r <= x) & (x < 2), -np.log(np.maximum(x - 1, 1e-300)), 0.0)
        out = c / np.where(x != 0, x, 1.0) * (lo_piece + hi_piece)
    return np.where((2 * r <= x) & (x < 2), out, 0.0)


def _pdf_right_boundary(l: float, x: np.ndarray) -> np.ndarray:
    q = 1.0 - l
    c = 2.0 / math.log(1.0 / q) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        lo_piece = np.where(
            (2 - 2 * l <= x) & (x < 2 - l), np.log(np.maximum(x - 1 + l, 1e-300) / q), 0.0
        )
        hi_piece = np.where((2 - l <= x) & (x < 2), -np.log(np.maximum(x - 1, 1e-300)), 0.0)
        out = c / np.where(x != 0, x, 1.0) * (lo_piece + hi_piece)
    return np.where((2 - 2 * l <= x) & (x < 2), out, 0.0)


def _pdf_interior_sum(l: float, r: float, x: np.ndarray) -> np.ndarray:
    """Six-subcase form: sum of the per-scenario contributions over g."""
    g = g_density(l, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = _piece(x, 2 - 2 * l, 2 - l, 1.0 / ((1.0 - l) * (x - 1 + l)))
        s = s + _piece(x, 2 * r, 1 + r, 1.0 / (r * (x - r)))
        s = s + _piece(x, 1 + r - 2 * l, 1 + r, 2.0 / ((x + 1 - r) * (x + r - 1)))
        s = s + _piece(x, 2 * r - l, 2 - l, 2.0 / ((x + l) * (x - l)))
        s = s + _piece(x, 2 * r - l, 2 * r, 1.0 / (r * (x - r)))
        s = s + _piece(x, 1 + r - 2 * l, 2 - 2 * l, 1.0 / ((1.0 - l) * (x - 1 + l)))
    return s / g


def cond_density(triple: PivotTriple, x) -> np.ndarray | float:
    """Conditional density of X = width1 + width2 given the pivot pair.

    Dispatches on the class: two-piece log form at the boundaries, the
    six-piece rational form over g in the interior.  Right continuous;
    zero below the support and for x >= 2.
    """
    xa = np.asarray(x, dtype=float)
    if triple.l3 == 0.0:
        out = _pdf_left_boundary(triple.r3, xa)
    elif triple.r3 == 1.0:
        out = _pdf_right_boundary(triple.l3, xa)
    else:
        out = _pdf_interior_sum(triple.l3, triple.r3, xa)
    return float(out) if np.isscalar(x) else out


def _m1(x, l, r):
    return 1.0 / (r * (x - r)) + 2.0 / ((x + l) * (x - l))


def _m2(x, l, r):
    return 1.0 / ((1.0 - l) * (x - 1 + l)) + 2.0 / ((x + l) * (x - l))


def _m3(x, l, r):
    return 2.0 / ((x + 1 - r) * (x + r - 1)) + 1.0 / ((1.0 - l) * (x + l - 1))


def _m4(x, l, r):
    return 1.0 / (r * (x - r)) + 2.0 / ((x + 1 - r) * (x + r - 1))


def cond_density_assembled(triple: PivotTriple, x) -> np.ndarray | float:
    """Regrouped three-piece interior form (m1..m4 helpers) over g.

    Equals cond_density pointwise away from the piece endpoints; both are
    right continuous at them.  Interior classes only.
    """
    if triple.is_boundary:
        raise ValueError("assembled form is defined for interior pairs only")
    l, r = triple.l3, triple.r3
    rho = l / (1.0 - r)
    g = g_density(l, r)
    xa = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if rho <= 1.0:
            s = _piece(xa, 2 * r - l, 1 + r - 2 * l, _m1(xa, l, r))
            s = s + _piece(xa, 1 + r - 2 * l, 1 + r, _m2(xa, l, r) + _m4(xa, l, r))
            s = s + _piece(xa, 1 + r, 2 - l, _m2(xa, l, r))
        else:
            s = _piece(xa, 1 + r - 2 * l, 2 * r - l, _m3(xa, l, r))
            s = s + _piece(xa, 2 * r - l, 2 - l, _m2(xa, l, r) + _m4(xa, l, r))
            s = s + _piece(xa, 2 - l, 1 + r, _m4(xa, l, r))
    out = s / g
    return float(out) if np.isscalar(x) else out


def bound_b(l: float, r: float) -> float:
    """Constant bound on the interior conditional density:
    (3/2) [1/(r(r-l)) + 1/((1-l)(r-l))] / g(l, r)."""
    if not (0.0 < l < r < 1.0):
        raise ValueError("need 0 < l < r < 1")
    return 1.5 * (1.0 / (r * (r - l)) + 1.0 / ((1.0 - l) * (r - l))) / g_density(l, r)


def b1(r: float) -> float:
    return 2.0 / math.log(1.0 / r) / (1.0 + r)


def b2(r: float) -> float:
    return 2.0 / math.log(1.0 / r) ** 2 * BETA / r


def bound_bt(t: float, l: float, r: float) -> float:
    """Optimal constant bound on the boundary conditional densities.

    For l = 0 the density peaks at x = 1 + r when r >= beta (bound b1(r))
    and at x = r (alpha + 1) when r < beta (bound b2(r)); the r = 1 case is
    the mirror image via r -> 1 - l.  The two branches meet continuously at
    the knee: b1(beta) = b2(beta) = 2/(1+beta)^2.
    """
    if l == 0.0 and r < 1.0:
        if not (0.0 <= t < r):
            raise ValueError("need t < r for the l3 = 0 bound")
        return b1(r) if r >= BETA else b2(r)
    if r == 1.0 and l > 0.0:
        if not (l < t <= 1.0):
            raise ValueError("need t > l for the r3 = 1 bound")
        q = 1.0 - l
        return b1(q) if q >= BETA else b2(q)
    raise ValueError("bound_bt applies to boundary pairs only (use bound_b)")


def sample_pivot_triple(t: float, rng: UniformStream | None = None) -> PivotTriple:
    """Three interval steps at quantile t; never returns the pair (0, 1)."""
    if not (0.0 < t < 1.0):
        raise ValueError("t must lie in (0, 1)")
    gen = (rng if rng is not None else UniformStream(0)).generator()
    l3, r3, _ = _kernels.pivot_triple(gen, t)
    assert not (l3 == 0.0 and r3 == 1.0), "pair (0, 1) has probability zero"
    return PivotTriple(t=t, l3=float(l3), r3=float(r3))


def left_boundary_mass(t: float) -> float:
    """P(l3 = 0, r3 < 1) = int_t^1 (ln r)^2/2 dr, in closed form."""
    lt = math.log(t)
    return 0.5 * (2.0 - t * (lt * lt - 2.0 * lt + 2.0))


def normalization(triple: PivotTriple, epsabs: float = 1e-10) -> float:
    """Integral of the conditional density over its support.

    Adaptive Gauss-Kronrod on each smooth piece, split at the known
    endpoints; the result should be 1 up to quadrature tolerance.
    """
    l, r = triple.l3, triple.r3
    if triple.l3 == 0.0:
        cuts = [2 * r, 1 + r, 2.0]
    elif triple.r3 == 1.0:
        cuts = [2 - 2 * l, 2 - l, 2.0]
    else:
        cuts = sorted(set(support_endpoints(l, r).tolist()))
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a < 1e-15:
            continue
        val, _ = quad(lambda u: cond_density(triple, u), a, b, epsabs=epsabs, limit=200)
        total += val
    return total


def expected_interior_bound(t: float) -> float:
    """E[b(L3, R3); interior] = pi^2/4 + (3/2) ln(t) ln(1-t) in closed form."""
    if not (0.0 < t < 1.0):
        raise ValueError("t must lie in (0, 1)")
    return math.pi**2 / 4.0 + 1.5 * math.log(t) * math.log(1.0 - t)
