"""Evaluation modes: turning base-generator integers into numbers in (0, 1).

Three ways of evaluating integers ``x`` drawn from ``{0, ..., M-1}``:

* direct:  ``x/M + 1/(2M)``
* direct2: ``x1/M + x2/M**2 + 1/(2M**2)``
* ratio:   ``min(x1, x2) / max(x1, x2)`` with the zero and tie cases mapped to
  two replacement values ``eps0`` and ``1 - eps1``.

Scalar functions validate their inputs and are the reference path.  The bulk
``generate`` path runs compiled kernels over raw integer blocks and works in
double precision.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING

import numba as nb
import numpy as np

if TYPE_CHECKING:
    from .generators import Generator

# largest double strictly below 1
ONE_MINUS_ULP = 1.0 - 2.0**-53


class ContractViolation(ValueError):
    """An argument is outside the documented domain of an operation."""


@dataclass(frozen=True)
class ModulusContext:
    """Replacement values for a base generator with outputs in ``{0..M-1}``."""

    M: int
    eps0: Fraction = field(init=False, repr=False)
    eps1: Fraction = field(init=False, repr=False)
    eps0_float: float = field(init=False, repr=False)
    one_minus_eps1_float: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        M = self.M
        if not isinstance(M, int) or M < 3:
            raise ContractViolation(f"modulus bound M must be an integer >= 3, got {M!r}")
        half = M // 2
        eps0 = Fraction(M - 1 + half, 2 * M * M)
        eps1 = Fraction(2 * M - 1 - half, 2 * M * M)
        object.__setattr__(self, "eps0", eps0)
        object.__setattr__(self, "eps1", eps1)
        # one rounding site; 1 - eps1 rounds to 1.0 once M exceeds ~2**52
        object.__setattr__(self, "eps0_float", float(eps0))
        object.__setattr__(self, "one_minus_eps1_float", min(float(1 - eps1), ONE_MINUS_ULP))

    @property
    def half(self) -> int:
        return self.M // 2

    def check(self, *xs: int) -> None:
        for x in xs:
            if not 0 <= x < self.M:
                raise ContractViolation(f"input {x} outside [0, {self.M - 1}]")


class RatioKind(enum.Enum):
    EPS0 = "eps0"
    EPS1_COMPLEMENT = "1-eps1"
    PROPER_RATIO = "ratio"


@dataclass(frozen=True)
class RatioOutput:
    value: float
    kind: RatioKind
    exact: Fraction


def ratio_transform(x1: int, x2: int, ctx: ModulusContext) -> RatioOutput:
    ctx.check(x1, x2)
    if (x1 == 0 < x2) or (x1 == x2 and x1 <= ctx.half - 1):
        return RatioOutput(ctx.eps0_float, RatioKind.EPS0, ctx.eps0)
    if (x2 == 0 < x1) or (x1 == x2 and x1 >= ctx.half):
        return RatioOutput(ctx.one_minus_eps1_float, RatioKind.EPS1_COMPLEMENT, 1 - ctx.eps1)
    lo, hi = (x1, x2) if x1 < x2 else (x2, x1)
    return RatioOutput(min(float(lo) / float(hi), ONE_MINUS_ULP), RatioKind.PROPER_RATIO, Fraction(lo, hi))


def direct_transform(x: int, ctx: ModulusContext) -> float:
    ctx.check(x)
    return _direct_float(x, ctx.M)


def direct2_transform(x1: int, x2: int, ctx: ModulusContext) -> float:
    ctx.check(x1, x2)
    return _direct2_float(x1, x2, ctx.M)


def direct_exact(x: int, M: int) -> Fraction:
    return Fraction(2 * x + 1, 2 * M)


def direct2_exact(x1: int, x2: int, M: int) -> Fraction:
    return Fraction(2 * (x1 * M + x2) + 1, 2 * M * M)


# Scalar float paths mirror the bulk kernels bit for bit.  Both are correctly
# rounded for M <= 2**26 (numerator and denominator exact in a double, one
# division); beyond that they are within a few ulps of exact.
EXACT_DIRECT2_M = 1 << 26

def _direct_float(x: int, M: int) -> float:
    u = (float(x) + 0.5) / float(M)
    return min(u, ONE_MINUS_ULP)


def _direct2_float(x1: int, x2: int, M: int) -> float:
    if M <= EXACT_DIRECT2_M:
        u = float(2 * (x1 * M + x2) + 1) / float(2 * M * M)
    else:
        m = float(M)
        u = (float(x1) + (float(x2) + 0.5) / m) / m
    return min(u, ONE_MINUS_ULP)


class ModeKind(enum.Enum):
    DIRECT = "direct"
    DIRECT2 = "direct2"
    RATIO = "ratio"
    RATIO_TWO_SOURCE = "ratio2"

    @property
    def consumes(self) -> int:
        return 1 if self is ModeKind.DIRECT else 2


@dataclass(frozen=True)
class EvaluationMode:
    kind: ModeKind
    context: ModulusContext
    second: Generator | None = None

    def __post_init__(self) -> None:
        if self.kind is ModeKind.RATIO_TWO_SOURCE:
            if self.second is None:
                raise ContractViolation("ratio2 mode needs a second generator")
            if self.second.M != self.context.M:
                raise ContractViolation(
                    f"ratio2 sources must share M ({self.context.M} != {self.second.M})"
                )
        elif self.second is not None:
            raise ContractViolation(f"{self.kind.value} mode takes no second generator")

    @classmethod
    def for_generator(cls, kind: ModeKind | str, gen: Generator,
                      second: Generator | None = None) -> EvaluationMode:
        return cls(ModeKind(kind), ModulusContext(gen.M), second)


def _draw_pair(gen: Generator, mode: EvaluationMode) -> tuple[int, int]:
    if mode.kind is ModeKind.RATIO_TWO_SOURCE:
        return gen.step(), mode.second.step()
    return gen.step(), gen.step()


def next_output(gen: Generator, mode: EvaluationMode) -> float:
    """Advance ``gen`` by one output's worth of inputs and evaluate them."""
    ctx = mode.context
    if mode.kind is ModeKind.DIRECT:
        return direct_transform(gen.step(), ctx)
    x1, x2 = _draw_pair(gen, mode)
    if mode.kind is ModeKind.DIRECT2:
        return direct2_transform(x1, x2, ctx)
    return ratio_transform(x1, x2, ctx).value


def next_output_exact(gen: Generator, mode: EvaluationMode) -> Fraction:
    """As :func:`next_output` but returning the exact rational value."""
    ctx = mode.context
    if mode.kind is ModeKind.DIRECT:
        x = gen.step()
        ctx.check(x)
        return direct_exact(x, ctx.M)
    x1, x2 = _draw_pair(gen, mode)
    if mode.kind is ModeKind.DIRECT2:
        ctx.check(x1, x2)
        return direct2_exact(x1, x2, ctx.M)
    return ratio_transform(x1, x2, ctx).exact


# -- bulk kernels ----------------------------------------------------------

@nb.njit(cache=True)
def _direct_kernel(raw, m, out):
    for i in range(out.size):
        u = (np.float64(raw[i]) + 0.5) / m
        out[i] = u if u < ONE_MINUS_ULP else ONE_MINUS_ULP


@nb.njit(cache=True)
def _direct2_kernel(xa, xb, m, out):
    if m <= EXACT_DIRECT2_M:
        mi = np.uint64(m)
        den = np.float64(2 * mi * mi)
        for i in range(out.size):
            num = np.uint64(2) * (xa[i] * mi + xb[i]) + np.uint64(1)
            out[i] = np.float64(num) / den
        return
    for i in range(out.size):
        u = (np.float64(xa[i]) + (np.float64(xb[i]) + 0.5) / m) / m
        out[i] = u if u < ONE_MINUS_ULP else ONE_MINUS_ULP


@nb.njit(cache=True)
def _ratio_kernel(xa, xb, half, eps0, one_minus_eps1, out):
    for i in range(out.size):
        x1 = xa[i]
        x2 = xb[i]
        if x1 == x2:
            out[i] = eps0 if x1 < half else one_minus_eps1
        elif x1 == 0:
            out[i] = eps0
        elif x2 == 0:
            out[i] = one_minus_eps1
        else:
            if x1 < x2:
                u = np.float64(x1) / np.float64(x2)
            else:
                u = np.float64(x2) / np.float64(x1)
            out[i] = u if u < ONE_MINUS_ULP else ONE_MINUS_ULP


CHUNK = 1 << 16


def evaluate_block(raw: np.ndarray, mode: EvaluationMode, out: np.ndarray,
                   raw_second: np.ndarray | None = None) -> None:
    """Evaluate raw integers into ``out``.

    ``raw`` holds ``out.size * consumes`` values, except in ratio2 mode where
    ``raw`` and ``raw_second`` each hold ``out.size`` values.
    """
    ctx = mode.context
    m = float(ctx.M)
    if mode.kind is ModeKind.DIRECT:
        _direct_kernel(raw, m, out)
    elif mode.kind is ModeKind.DIRECT2:
        _direct2_kernel(raw[0::2], raw[1::2], m, out)
    else:
        if mode.kind is ModeKind.RATIO_TWO_SOURCE:
            xa, xb = raw, raw_second
        else:
            xa, xb = raw[0::2], raw[1::2]
        _ratio_kernel(xa, xb, np.uint64(ctx.half), ctx.eps0_float,
                      ctx.one_minus_eps1_float, out)


def generate(gen: Generator, mode: EvaluationMode, n: int,
             out: np.ndarray | None = None) -> np.ndarray:
    """Produce ``n`` outputs, equivalent to ``n`` calls of :func:`next_output`."""
    if out is None:
        out = np.empty(n, dtype=np.float64)
    per = mode.kind.consumes if mode.kind is not ModeKind.RATIO_TWO_SOURCE else 1
    raw = np.empty(CHUNK * per, dtype=np.uint64)
    raw2 = np.empty(CHUNK, dtype=np.uint64) if mode.second is not None else None
    for start in range(0, n, CHUNK):
        k = min(CHUNK, n - start)
        block = raw[: k * per]
        gen.fill(block)
        block2 = None
        if raw2 is not None:
            block2 = raw2[:k]
            mode.second.fill(block2)
        evaluate_block(block, mode, out[start:start + k], block2)
    return out
