"""Base generators: state, recursion and raw integer output.

Each generator exposes a scalar ``step()`` working on Python integers and a
bulk ``fill(out)`` backed by a compiled kernel; both advance the same state.
Evaluation into (0, 1) is the job of :mod:`ratiorng.core`.

Spec strings (also accepted by the CLI)::

    lcg:m=<int>,a=<int>,c=<int>     power-of-two modulus
    lcgp:m=<int>,a=<int>            prime modulus, multiplicative
    xor64:13,7,17                   Marsaglia xorshift on 64-bit words
    lfib:2p31,55,24,+               lagged Fibonacci, op in {+,-}
    pcg64                           numpy's PCG64 (strong reference)

Integers may be written as sums/differences of ``<b>p<e>`` powers, so
``2p61-1`` is 2**61 - 1 and ``2p30-2p19`` is 2**30 - 2**19.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

import numba as nb
import numpy as np

from .core import ContractViolation, EvaluationMode, ModeKind, ModulusContext, next_output_exact

U64 = (1 << 64) - 1

# expands a 64-bit seed into lagged-Fibonacci lag slots
SEED_LCG_A = 6364136223846793003
SEED_LCG_C = 1442695040888963407

GRAMMAR = (
    "lcg:m=<int>,a=<int>,c=<int> | lcgp:m=<int>,a=<int> | xor64:<a>,<b>,<c> | "
    "lfib:<m>,<long lag>,<short lag>,<+|-> | pcg64   (integers accept 2p31-1 style powers)"
)


class SpecError(ValueError):
    """Malformed generator spec string."""

    def __init__(self, msg: str):
        super().__init__(f"{msg}\n  grammar: {GRAMMAR}")


class Family(enum.Enum):
    LCG_POW2 = "lcg"
    LCG_PRIME = "lcgp"
    XORSHIFT64 = "xor64"
    LAGGED_FIBONACCI = "lfib"
    PCG64 = "pcg64"


_TERM = re.compile(r"([+-]?)\s*(\d+)(?:[p^](\d+))?")


def parse_int(text: str) -> int:
    text = text.strip().replace(" ", "")
    if not text:
        raise SpecError("empty integer")
    pos, total = 0, 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos or (pos > 0 and not m.group(1)):
            raise SpecError(f"cannot parse integer {text!r}")
        base = int(m.group(2))
        value = base ** int(m.group(3)) if m.group(3) is not None else base
        total += -value if m.group(1) == "-" else value
        pos = m.end()
    return total


def _format_int(n: int) -> str:
    if n > 1024 and n & (n - 1) == 0:
        return f"2p{n.bit_length() - 1}"
    if n > 1024 and (n + 1) & n == 0:
        return f"2p{n.bit_length()}-1"
    return str(n)


@dataclass(frozen=True)
class GeneratorSpec:
    """Immutable description of a base generator (without its seed)."""

    family: Family
    modulus: int = 0
    a: int = 0
    c: int = 0
    shifts: tuple[int, int, int] = (13, 7, 17)
    lags: tuple[int, int] = (55, 24)
    op: str = "+"

    def __post_init__(self) -> None:
        f = self.family
        if f is Family.LCG_POW2:
            m = self.modulus
            if m < 2 or m > 1 << 64 or m & (m - 1):
                raise SpecError(f"lcg modulus must be a power of two <= 2p64, got {m}")
            if not (0 < self.a < m and 0 <= self.c < m):
                raise SpecError("lcg needs 0 < a < m and 0 <= c < m")
        elif f is Family.LCG_PRIME:
            if not 2 < self.modulus <= U64:
                raise SpecError("lcgp modulus must fit in 64 bits")
            if not 0 < self.a < self.modulus or self.c != 0:
                raise SpecError("lcgp needs 0 < a < m and c = 0")
        elif f is Family.XORSHIFT64:
            if len(self.shifts) != 3 or not all(0 < s < 64 for s in self.shifts):
                raise SpecError("xor64 needs three shifts in 1..63")
        elif f is Family.LAGGED_FIBONACCI:
            m = self.modulus
            r, s = self.lags
            if m < 2 or m > 1 << 63 or m & (m - 1):
                raise SpecError("lfib modulus must be a power of two <= 2p63")
            if not 0 < s < r:
                raise SpecError("lfib needs long lag > short lag > 0")
            if self.op not in "+-" or len(self.op) != 1:
                raise SpecError("lfib op must be + or -")

    @property
    def M(self) -> int:
        """Output range bound: raw outputs lie in ``{0, ..., M-1}``."""
        if self.family in (Family.XORSHIFT64, Family.PCG64):
            return 1 << 64
        return self.modulus

    @classmethod
    def parse(cls, text: str) -> GeneratorSpec:
        text = text.strip()
        if text in TABLE1:
            text = TABLE1[text]
        name, _, body = text.partition(":")
        try:
            family = Family(name.strip().lower())
        except ValueError:
            raise SpecError(f"unknown generator family {name!r}") from None
        if family is Family.PCG64:
            if body:
                raise SpecError("pcg64 takes no parameters")
            return cls(family)
        if family in (Family.LCG_POW2, Family.LCG_PRIME):
            fields = {}
            for item in filter(None, body.split(",")):
                key, eq, val = item.partition("=")
                if not eq or key.strip() not in ("m", "a", "c"):
                    raise SpecError(f"bad lcg field {item!r}")
                fields[key.strip()] = parse_int(val)
            need = {"m", "a", "c"} if family is Family.LCG_POW2 else {"m", "a"}
            if not need <= fields.keys():
                raise SpecError(f"{family.value} needs fields {sorted(need)}")
            return cls(family, modulus=fields["m"], a=fields["a"], c=fields.get("c", 0))
        parts = [p.strip() for p in body.split(",")]
        if family is Family.XORSHIFT64:
            if len(parts) != 3:
                raise SpecError("xor64 needs three shifts")
            return cls(family, shifts=tuple(parse_int(p) for p in parts))
        if len(parts) != 4:
            raise SpecError("lfib needs modulus, two lags and an op")
        return cls(family, modulus=parse_int(parts[0]),
                   lags=(parse_int(parts[1]), parse_int(parts[2])), op=parts[3])

    def __str__(self) -> str:
        f = self.family
        if f is Family.LCG_POW2:
            return f"lcg:m={_format_int(self.modulus)},a={self.a},c={self.c}"
        if f is Family.LCG_PRIME:
            return f"lcgp:m={_format_int(self.modulus)},a={self.a}"
        if f is Family.XORSHIFT64:
            return "xor64:" + ",".join(map(str, self.shifts))
        if f is Family.LAGGED_FIBONACCI:
            return f"lfib:{_format_int(self.modulus)},{self.lags[0]},{self.lags[1]},{self.op}"
        return "pcg64"

    def seeded(self, seed: int) -> Generator:
        cls = {
            Family.LCG_POW2: LcgGenerator,
            Family.LCG_PRIME: LcgGenerator,
            Family.XORSHIFT64: Xorshift64Generator,
            Family.LAGGED_FIBONACCI: LaggedFibonacciGenerator,
            Family.PCG64: Pcg64Generator,
        }[self.family]
        return cls(self, seed)


# The nine Table-1 parameterizations that ship; keys double as CLI presets.
TABLE1 = {
    "LCG(2^46,5^13,0)": "lcg:m=2p46,a=5p13,c=0",
    "LCG(2^48,25214903917,11)": "lcg:m=2p48,a=25214903917,c=11",
    "LCG(2^48,5^19,0)": "lcg:m=2p48,a=5p19,c=0",
    "LCG(2^63,5^19,1)": "lcg:m=2p63,a=5p19,c=1",
    "LCG(2^31-1,16807,0)": "lcgp:m=2p31-1,a=16807",
    "LCG(2^61-1,2^30-2^19,0)": "lcgp:m=2p61-1,a=2p30-2p19",
    "Marsa-xor64(13,7,17)": "xor64:13,7,17",
    "LFib(2^31,55,24,+)": "lfib:2p31,55,24,+",
    "LFib(2^31,55,24,-)": "lfib:2p31,55,24,-",
}


# -- kernels ---------------------------------------------------------------

@nb.njit(cache=True)
def _lcg_pow2_fill(x, a, c, mask, out):
    for i in range(out.size):
        x = (a * x + c) & mask
        out[i] = x
    return x


@nb.njit(cache=True)
def _addmod(x, y, m):
    # x, y < m <= 2**64 - 1, no overflow
    if x >= m - y:
        return x - (m - y)
    return x + y


@nb.njit(cache=True)
def _mulmod_peasant(a, x, m):
    r = np.uint64(0)
    bit = np.uint64(1) << np.uint64(63)
    while bit:
        r = _addmod(r, r, m)
        if a & bit:
            r = _addmod(r, x, m)
        bit >>= np.uint64(1)
    return r


@nb.njit(cache=True)
def _lcg_mod_fill(x, a, c, m, method, q, r, out):
    # method 0: product fits in 64 bits; 1: Schrage; 2: shift-and-add
    for i in range(out.size):
        if method == 0:
            x = (a * x + c) % m
        elif method == 1:
            hi = x // q
            lo = x - hi * q
            t1 = a * lo
            t2 = r * hi
            x = t1 - t2 if t1 >= t2 else m - (t2 - t1)
            if x == m:
                x = np.uint64(0)
            x = _addmod(x, c, m)
        else:
            x = _addmod(_mulmod_peasant(a, x, m), c, m)
        out[i] = x
    return x


@nb.njit(cache=True)
def _xorshift64_fill(x, s1, s2, s3, out):
    for i in range(out.size):
        x ^= x << s1
        x ^= x >> s2
        x ^= x << s3
        out[i] = x
    return x


@nb.njit(cache=True)
def _lfib_fill(buf, pos, short_offset, subtract, mask, out):
    r = buf.size
    for i in range(out.size):
        j = pos + short_offset
        if j >= r:
            j -= r
        if subtract:
            v = (buf[pos] - buf[j]) & mask
        else:
            v = (buf[pos] + buf[j]) & mask
        buf[pos] = v
        out[i] = v
        pos += 1
        if pos == r:
            pos = 0
    return pos


# -- generator objects -----------------------------------------------------

class Generator:
    """Mutable generator state; advance from one thread at a time."""

    def __init__(self, spec: GeneratorSpec):
        self.spec = spec
        self.steps_taken = 0

    @property
    def M(self) -> int:
        return self.spec.M

    def step(self) -> int:
        raise NotImplementedError

    def fill(self, out: np.ndarray) -> np.ndarray:
        """Write the next ``out.size`` raw values into a uint64 array."""
        raise NotImplementedError

    def get_state(self):
        raise NotImplementedError

    def set_state(self, state) -> None:
        raise NotImplementedError

    def raw(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=np.uint64)
        return self.fill(out)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec}, state={self.get_state()!r})"


class LcgGenerator(Generator):
    """``x <- (a*x + c) mod m``; outputs the new state."""

    def __init__(self, spec: GeneratorSpec, seed: int):
        super().__init__(spec)
        m, a, c = spec.modulus, spec.a, spec.c
        x = seed % m
        if c == 0 and x == 0:
            raise ContractViolation(f"multiplicative LCG seed must be nonzero mod {m}")
        self.state = x
        if spec.family is Family.LCG_POW2:
            self._method = -1
        elif a * (m - 1) + c <= U64:
            self._method = 0
        elif m % a < m // a and m <= 1 << 63:
            self._method = 1
        else:
            self._method = 2

    def step(self) -> int:
        s = self.spec
        self.state = (s.a * self.state + s.c) % s.modulus
        self.steps_taken += 1
        return self.state

    def fill(self, out):
        s = self.spec
        u = np.uint64
        if self._method < 0:
            x = _lcg_pow2_fill(u(self.state), u(s.a), u(s.c), u(s.modulus - 1), out)
        else:
            q, r = divmod(s.modulus, s.a)
            x = _lcg_mod_fill(u(self.state), u(s.a), u(s.c), u(s.modulus), self._method,
                              u(q), u(r), out)
        self.state = int(x)
        self.steps_taken += out.size
        return out

    def get_state(self):
        return self.state

    def set_state(self, state) -> None:
        self.state = state


class Xorshift64Generator(Generator):
    def __init__(self, spec: GeneratorSpec, seed: int):
        super().__init__(spec)
        self.state = seed & U64
        if self.state == 0:
            raise ContractViolation("xorshift state must be nonzero")

    def step(self) -> int:
        a, b, c = self.spec.shifts
        x = self.state
        x ^= (x << a) & U64
        x ^= x >> b
        x ^= (x << c) & U64
        self.state = x
        self.steps_taken += 1
        return x

    def fill(self, out):
        u = np.uint64
        a, b, c = self.spec.shifts
        self.state = int(_xorshift64_fill(u(self.state), u(a), u(b), u(c), out))
        self.steps_taken += out.size
        return out

    def get_state(self):
        return self.state

    def set_state(self, state) -> None:
        self.state = state


def lfib_seed_buffer(seed: int, spec: GeneratorSpec) -> list[int]:
    """Lag slots from a 64-bit seed: top bits of a 64-bit LCG, oldest first."""
    bits = spec.modulus.bit_length() - 1
    x = seed & U64
    buf = []
    for _ in range(spec.lags[0]):
        x = (SEED_LCG_A * x + SEED_LCG_C) & U64
        buf.append(x >> (64 - bits))
    return buf


class LaggedFibonacciGenerator(Generator):
    """``x_i = (x_{i-r} op x_{i-s}) mod m`` over a circular buffer of ``r`` slots."""

    def __init__(self, spec: GeneratorSpec, seed: int | None = None,
                 buffer: list[int] | None = None):
        super().__init__(spec)
        if buffer is None:
            buffer = lfib_seed_buffer(seed, spec)
        if len(buffer) != spec.lags[0]:
            raise ContractViolation(f"lag buffer needs {spec.lags[0]} entries")
        if not any(buffer):
            raise ContractViolation("all-zero lag buffer is degenerate")
        if not all(0 <= v < spec.modulus for v in buffer):
            raise ContractViolation("lag buffer entries must lie in [0, m)")
        self.buffer = np.array(buffer, dtype=np.uint64)
        self.pos = 0

    @classmethod
    def from_buffer(cls, spec: GeneratorSpec, buffer: list[int]) -> LaggedFibonacciGenerator:
        return cls(spec, buffer=buffer)

    def step(self) -> int:
        r, s = self.spec.lags
        buf, pos = self.buffer, self.pos
        old, recent = int(buf[pos]), int(buf[(pos + r - s) % r])
        v = (old - recent if self.spec.op == "-" else old + recent) % self.spec.modulus
        buf[pos] = v
        self.pos = (pos + 1) % r
        self.steps_taken += 1
        return v

    def fill(self, out):
        r, s = self.spec.lags
        self.pos = int(_lfib_fill(self.buffer, self.pos, r - s, self.spec.op == "-",
                                  np.uint64(self.spec.modulus - 1), out))
        self.steps_taken += out.size
        return out

    def get_state(self):
        return tuple(int(v) for v in np.roll(self.buffer, -self.pos))

    def set_state(self, state) -> None:
        self.buffer = np.array(state, dtype=np.uint64)
        self.pos = 0


class Pcg64Generator(Generator):
    """numpy's PCG64 emitting raw 64-bit words; the strong reference source."""

    def __init__(self, spec: GeneratorSpec, seed: int):
        super().__init__(spec)
        self._bitgen = np.random.PCG64(seed)

    def step(self) -> int:
        self.steps_taken += 1
        return int(self._bitgen.random_raw())

    def fill(self, out):
        out[:] = self._bitgen.random_raw(out.size)
        self.steps_taken += out.size
        return out

    def get_state(self):
        st = self._bitgen.state["state"]
        return (st["state"], st["inc"])

    def set_state(self, state) -> None:
        s = self._bitgen.state
        s["state"] = {"state": state[0], "inc": state[1]}
        self._bitgen.state = s


def make_mode(kind: ModeKind | str, gen: Generator,
              second: Generator | None = None) -> EvaluationMode:
    return EvaluationMode.for_generator(kind, gen, second)


def parse_mode(text: str) -> tuple[ModeKind, GeneratorSpec | None]:
    """``direct | direct2 | ratio | ratio2:<spec>`` -> (kind, second spec)."""
    name, sep, rest = text.partition(":")
    try:
        kind = ModeKind(name.strip())
    except ValueError:
        raise SpecError(f"unknown mode {text!r}; expected direct, direct2, ratio or ratio2:<spec>") from None
    if kind is ModeKind.RATIO_TWO_SOURCE:
        if not sep:
            raise SpecError("ratio2 needs a second generator: ratio2:<spec>")
        return kind, GeneratorSpec.parse(rest)
    if sep:
        raise SpecError(f"mode {name!r} takes no argument")
    return kind, None


def build(spec: GeneratorSpec, kind: ModeKind | str, seed: int,
          second: GeneratorSpec | None = None) -> tuple[Generator, EvaluationMode]:
    """Seed a generator (and optional second source, seeded with seed+1)."""
    gen = spec.seeded(seed)
    other = second.seeded(seed + 1) if second is not None else None
    return gen, make_mode(kind, gen, other)


# -- periods ---------------------------------------------------------------

def period_pair_length(T: int) -> int:
    """Period of non-overlapping pairs for a base period ``T``."""
    if T < 1:
        raise ContractViolation(f"period must be positive, got {T}")
    return T // 2 if T % 2 == 0 else 2 * T


def _divisors(n: int) -> list[int]:
    small, large = [], []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
    return small + large[::-1]


def detect_period(spec: GeneratorSpec, kind: ModeKind | str, cap: int, seed: int = 1,
                  second: GeneratorSpec | None = None) -> int | None:
    """Eventual period of the output stream, or ``None`` if it exceeds ``cap``.

    Brent's algorithm finds the cycle of the per-output state (the state
    after consuming one output's inputs).  The output period divides that
    cycle length; the smallest divisor reproducing one full cycle of exact
    outputs is returned.  Meant for miniature generators.
    """
    gen, mode = build(spec, kind, seed, second)

    def state():
        if mode.second is not None:
            return (gen.get_state(), mode.second.get_state())
        return gen.get_state()

    def restore(s):
        if mode.second is not None:
            gen.set_state(s[0])
            mode.second.set_state(s[1])
        else:
            gen.set_state(s)

    def advance(s):
        restore(s)
        next_output_exact(gen, mode)
        return state()

    start = state()
    power = lam = 1
    tortoise, hare = start, advance(start)
    while tortoise != hare:
        if power == lam:
            if power > 2 * cap:
                return None
            tortoise = hare
            power *= 2
            lam = 0
        hare = advance(hare)
        lam += 1

    tortoise = hare = start
    for _ in range(lam):
        hare = advance(hare)
    mu = 0
    while tortoise != hare:
        tortoise, hare = advance(tortoise), advance(hare)
        mu += 1
    if mu + lam > cap:
        return None

    restore(tortoise)
    outputs = [next_output_exact(gen, mode) for _ in range(lam)]
    for d in _divisors(lam):
        if all(outputs[i] == outputs[(i + d) % lam] for i in range(lam)):
            return d
    return lam
