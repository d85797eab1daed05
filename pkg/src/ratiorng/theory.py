"""Exact distribution theory of the three evaluation modes.

For ``X1, X2`` iid uniform on ``{0, ..., M-1}`` this module computes, with
exact rationals, the cdf of the ratio output ``Y = h(X1, X2)``, the
Kolmogorov-Smirnov distance of ``Y`` (and of the direct and direct-2
outputs) from U(0,1), and the number of distinct values ``Y`` can take.

Hot loops run as compiled integer kernels: every jump point and cdf value is
a rational with a known denominator, so deviations are compared by integer
cross-multiplication and no rounding ever happens.  Results come back as
:class:`fractions.Fraction`.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numba as nb
import numpy as np
from scipy import stats

from .core import ContractViolation, ModulusContext, ratio_transform

ExactFraction = Fraction

BRUTE_FORCE_CAP = 512
KS_CAP = 1 << 14
DIRECT2_CAP = 1 << 12

# rational over-approximation of 7/2 - 2*sqrt(2) = 0.67157287...
INTERIOR_CONSTANT = Fraction(6715730, 10**7)

LEFT_LIMIT, AT_JUMP = 0, 1


class Side(enum.Enum):
    LEFT_LIMIT = "left-limit"
    AT_JUMP = "at-jump"


def _side(code: int) -> Side:
    return Side.AT_JUMP if code == AT_JUMP else Side.LEFT_LIMIT


@dataclass(frozen=True)
class KsReport:
    mode: str
    M: int
    distance: Fraction
    attained_at: Fraction
    side: Side
    bound: Fraction
    within_bound: bool
    n_jumps: int


@dataclass(frozen=True)
class InteriorCheck:
    M: int
    max_interior_deviation: Fraction
    attained_at: Fraction | None
    side: Side | None
    bound: Fraction
    within: bool


def _cap(M: int, cap: int, flag: str = "--cap") -> None:
    if M > cap:
        raise ContractViolation(f"M={M} exceeds the cap {cap}; raise it with {flag}")


def _as_fraction(t) -> Fraction:
    t = Fraction(t)
    if not 0 <= t <= 1:
        raise ContractViolation(f"t={t} outside [0, 1]")
    return t


# -- Farey sequence --------------------------------------------------------

@nb.njit(cache=True)
def _farey_count(n):
    a, b, c, d = 0, 1, 1, n
    count = 0
    while c < d:
        count += 1
        k = (n + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
    return count


@nb.njit(cache=True)
def _farey_fill(n, num, den):
    a, b, c, d = 0, 1, 1, n
    i = 0
    while c < d:
        num[i] = c
        den[i] = d
        i += 1
        k = (n + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b


def farey_arrays(M: int) -> tuple[np.ndarray, np.ndarray]:
    """Numerators and denominators of ``k/l``, ``1 <= k < l <= M-1``, ascending."""
    if M < 3:
        raise ContractViolation(f"M must be >= 3, got {M}")
    n = M - 1
    size = _farey_count(n)
    num = np.empty(size, dtype=np.int64)
    den = np.empty(size, dtype=np.int64)
    _farey_fill(n, num, den)
    return num, den


def farey_length(M: int) -> int:
    """``len(farey_enumerate(M))`` without materializing the fractions."""
    if M < 3:
        raise ContractViolation(f"M must be >= 3, got {M}")
    return int(_farey_count(M - 1))


def farey_enumerate(M: int) -> list[Fraction]:
    num, den = farey_arrays(M)
    return [Fraction(int(k), int(l)) for k, l in zip(num, den)]


# -- totients and value counts ---------------------------------------------

_phi: list[int] = [0, 1]


def totients(n: int) -> list[int]:
    """Euler's phi for ``0..n`` by a linear sieve (cached, grows on demand)."""
    global _phi
    if n < len(_phi):
        return _phi[: n + 1]
    phi = [0] * (n + 1)
    phi[1] = 1 if n >= 1 else 0
    primes: list[int] = []
    for i in range(2, n + 1):
        if phi[i] == 0:
            phi[i] = i - 1
            primes.append(i)
        for p in primes:
            ip = i * p
            if ip > n:
                break
            if i % p == 0:
                phi[ip] = phi[i] * p
                break
            phi[ip] = phi[i] * (p - 1)
    _phi = phi
    return phi


def value_count(M: int) -> int:
    """Number of distinct values the ratio output can take."""
    if M <= 2:
        raise ContractViolation(f"M must exceed 2, got {M}")
    return sum(totients(M - 1)[2:M]) + 2


def value_count_asymptotic(M: int) -> float:
    if M <= 2:
        raise ContractViolation(f"M must exceed 2, got {M}")
    return 3 * (M - 1) ** 2 / math.pi**2


# -- the cdf of the ratio output -------------------------------------------

def ratio_cdf_eval(M: int, t) -> Fraction:
    """``P(Y <= t)`` from the closed form with ``sum(floor(t*k))``."""
    ctx = ModulusContext(M)
    t = _as_fraction(t)
    if t < ctx.eps0:
        return Fraction(0)
    if t < Fraction(1, M - 1):
        return 2 * ctx.eps0
    if t < 1 - ctx.eps1:
        p, q = t.numerator, t.denominator
        floors = sum((p * k) // q for k in range(1, M))
        return 2 * ctx.eps0 + Fraction(2 * floors, M * M)
    return Fraction(1)


@lru_cache(maxsize=8)
def _brute_force_table(M: int) -> tuple[list[Fraction], list[int]]:
    ctx = ModulusContext(M)
    counts: dict[Fraction, int] = {}
    for x1 in range(M):
        for x2 in range(M):
            y = ratio_transform(x1, x2, ctx).exact
            counts[y] = counts.get(y, 0) + 1
    points = sorted(counts)
    cumulative, total = [], 0
    for y in points:
        total += counts[y]
        cumulative.append(total)
    return points, cumulative


def brute_force_cdf(M: int, t, cap: int = BRUTE_FORCE_CAP) -> Fraction:
    """``P(Y <= t)`` by enumerating all ``M**2`` input pairs."""
    _cap(M, cap)
    t = _as_fraction(t)
    points, cumulative = _brute_force_table(M)
    i = bisect.bisect_right(points, t)
    return Fraction(cumulative[i - 1] if i else 0, M * M)


@dataclass(frozen=True)
class RatioCdf:
    """The step cdf of ``Y`` as an ordered list of jump points and masses."""

    M: int
    eps0: Fraction
    eps1: Fraction
    points: list[Fraction]
    masses: list[Fraction]

    def __post_init__(self) -> None:
        acc, cum = Fraction(0), []
        for m in self.masses:
            acc += m
            cum.append(acc)
        object.__setattr__(self, "_cumulative", cum)

    @property
    def cumulative(self) -> list[Fraction]:
        return self._cumulative

    def __call__(self, t) -> Fraction:
        t = _as_fraction(t)
        i = bisect.bisect_right(self.points, t)
        return self._cumulative[i - 1] if i else Fraction(0)


def ratio_cdf(M: int, cap: int = DIRECT2_CAP) -> RatioCdf:
    """Jump list over ``{eps0} + D_M + {1-eps1}``; mass ``2*floor((M-1)/l)/M**2`` at ``k/l``."""
    _cap(M, cap)
    ctx = ModulusContext(M)
    M2 = M * M
    num, den = farey_arrays(M)
    points = [ctx.eps0]
    masses = [2 * ctx.eps0]
    for k, l in zip(num.tolist(), den.tolist()):
        points.append(Fraction(k, l))
        masses.append(Fraction(2 * ((M - 1) // l), M2))
    points.append(1 - ctx.eps1)
    masses.append(2 * ctx.eps1)
    return RatioCdf(M, ctx.eps0, ctx.eps1, points, masses)


# -- Kolmogorov-Smirnov distances ------------------------------------------

@nb.njit(cache=True)
def _ratio_ks_walk(M):
    # Deviations are stored as num/(M*M*q); comparisons cross-multiply.
    n = M - 1
    h = M // 2
    M2 = M * M
    P0 = M - 1 + h            # eps0 = P0/(2*M2), and F(eps0) = P0/M2
    P1 = 2 * M - 1 - h        # eps1 = P1/(2*M2)
    mass = np.empty(M, dtype=np.int64)
    for l in range(1, M):
        mass[l] = 2 * (n // l)

    # t_0 = eps0: left limit |0 - eps0| and jump |2*eps0 - eps0| tie at P0
    b_num, b_q, b_tn, b_td, b_side = P0, 2, P0, 2 * M2, 0
    i_num, i_q, i_tn, i_td, i_side = 0, 1, 0, 1, -1

    C = P0
    a, b, c, d = 0, 1, 1, n
    idx = 0
    while c < d:
        idx += 1
        for side in range(2):
            if side == 1:
                C += mass[d]
            v = C * d - c * M2
            if v < 0:
                v = -v
            if v * b_q > b_num * d:
                b_num, b_q, b_tn, b_td, b_side = v, d, c, d, side
            if idx >= 2 and v * i_q > i_num * d:
                i_num, i_q, i_tn, i_td, i_side = v, d, c, d, side
        k = (n + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b

    C_before_last = C
    # t_L = 1 - eps1 = (2*M2 - P1)/(2*M2)
    tn = 2 * M2 - P1
    for side in range(2):
        if side == 1:
            C = M2
        v = 2 * C - tn
        if v < 0:
            v = -v
        if v * b_q > b_num * 2:
            b_num, b_q, b_tn, b_td, b_side = v, 2, tn, 2 * M2, side
    return (b_num, b_q, b_tn, b_td, b_side,
            i_num, i_q, i_tn, i_td, i_side, idx, C_before_last)


@lru_cache(maxsize=64)
def _ratio_walk(M: int):
    return tuple(int(v) for v in _ratio_ks_walk(M))


def ks_distance_ratio(M: int, cap: int = KS_CAP) -> KsReport:
    """Exact ``sup_t |F_Y(t) - t|`` by walking the ordered jump set."""
    ctx = ModulusContext(M)
    _cap(M, cap)
    (b_num, b_q, b_tn, b_td, b_side, *_, idx, c_last) = _ratio_walk(M)
    if c_last + 2 * ctx.eps1 * M * M != M * M:
        raise AssertionError(f"jump masses do not sum to 1 for M={M}")
    distance = Fraction(b_num, M * M * b_q)
    bound = max(ctx.eps0, ctx.eps1)
    return KsReport("ratio", M, distance, Fraction(b_tn, b_td), _side(b_side),
                    bound, distance <= bound, idx + 2)


def interior_bound(M: int) -> Fraction:
    """``0.6715730/M + 2/M**2``, just above ``(7/2 - 2*sqrt(2))/M + 2/M**2``."""
    return INTERIOR_CONSTANT / M + Fraction(2, M * M)


def ks_interior_bound_check(M: int, cap: int = KS_CAP) -> InteriorCheck:
    """Largest deviation over the Farey jumps after the first one."""
    ModulusContext(M)
    _cap(M, cap)
    (*_, i_num, i_q, i_tn, i_td, i_side, _idx, _c) = _ratio_walk(M)
    bound = interior_bound(M)
    deviation = Fraction(i_num, M * M * i_q)
    if i_side < 0:
        return InteriorCheck(M, deviation, None, None, bound, True)
    return InteriorCheck(M, deviation, Fraction(i_tn, i_td), _side(i_side), bound,
                         deviation <= bound)


@nb.njit(cache=True)
def _grid_ks_walk(M, two_inputs):
    # Jumps of mass 1/K at (2j+1)/(2K), j = 0..K-1, K = M or M*M; j is
    # x (direct) or x1*M + x2 (direct-2), visited in increasing order.
    # Deviations are num/(2K).
    best, b_t, b_side = -1, 0, 0
    outer = M
    inner = M if two_inputs else 1
    j = 0
    for x1 in range(outer):
        for x2 in range(inner):
            tn = 2 * (x1 * inner + x2) + 1
            left = tn - 2 * j
            if left < 0:
                left = -left
            if left > best:
                best, b_t, b_side = left, tn, 0
            j += 1
            at = 2 * j - tn
            if at < 0:
                at = -at
            if at > best:
                best, b_t, b_side = at, tn, 1
    return best, b_t, b_side, j


def ks_distance_direct(M: int) -> KsReport:
    if M < 2:
        raise ContractViolation(f"M must be >= 2, got {M}")
    num, tn, side, count = (int(v) for v in _grid_ks_walk(M, False))
    distance = Fraction(num, 2 * M)
    bound = Fraction(1, 2 * M)
    return KsReport("direct", M, distance, Fraction(tn, 2 * M), _side(side), bound,
                    distance <= bound, count)


def ks_distance_direct2(M: int, cap: int = DIRECT2_CAP) -> KsReport:
    if M < 2:
        raise ContractViolation(f"M must be >= 2, got {M}")
    _cap(M, cap)
    num, tn, side, count = (int(v) for v in _grid_ks_walk(M, True))
    K = M * M
    distance = Fraction(num, 2 * K)
    bound = Fraction(1, 2 * K)
    return KsReport("direct2", M, distance, Fraction(tn, 2 * K), _side(side), bound,
                    distance <= bound, count)


# -- continuous inputs ------------------------------------------------------

@dataclass(frozen=True)
class ContinuousRatioResult:
    n: int
    ks_statistic: float
    critical: float
    passed: bool


def continuous_ratio_property_test(n: int, rng, level: float = 1e-4) -> ContinuousRatioResult:
    """KS check that min/max of two continuous uniforms is again uniform.

    ``rng`` is anything with a numpy-style ``random(size)`` method.  Passes
    iff ``sqrt(n) * D_n`` is below the Kolmogorov critical value at ``level``.
    """
    if n < 1000:
        raise ContractViolation("need at least 1000 pairs")
    u = np.asarray(rng.random(2 * n), dtype=np.float64).reshape(n, 2)
    lo, hi = u.min(axis=1), u.max(axis=1)
    z = np.divide(lo, hi, out=np.zeros(n), where=hi > 0)   # 0/0 := 0
    z.sort()
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - z)), float(np.max(z - (i - 1) / n)))
    critical = float(stats.kstwobign.isf(level))
    return ContinuousRatioResult(n, d, critical, math.sqrt(n) * d < critical)
