"""Throughput timing of output generation."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import CHUNK, ModeKind, evaluate_block
from .generators import GeneratorSpec, build

MIN_COUNT = 10**6


@dataclass(frozen=True)
class BenchResult:
    generator: str
    mode: str
    count: int
    elapsed_seconds: float

    @property
    def nanos_per_output(self) -> float:
        return self.elapsed_seconds * 1e9 / self.count


def _time_once(spec, kind, count, seed, second) -> float:
    gen, mode = build(spec, kind, seed, second)
    per = kind.consumes if kind is not ModeKind.RATIO_TWO_SOURCE else 1
    raw = np.empty(CHUNK * per, dtype=np.uint64)
    raw2 = np.empty(CHUNK, dtype=np.uint64) if second is not None else None
    sink = np.empty(CHUNK, dtype=np.float64)
    start = time.perf_counter()
    for done in range(0, count, CHUNK):
        k = min(CHUNK, count - done)
        block = raw[: k * per]
        gen.fill(block)
        block2 = None
        if raw2 is not None:
            block2 = raw2[:k]
            mode.second.fill(block2)
        evaluate_block(block, mode, sink[:k], block2)
    return time.perf_counter() - start


def bench(spec: GeneratorSpec, kind: ModeKind | str, count: int, seed: int = 1,
          second: GeneratorSpec | None = None, repeats: int = 3) -> BenchResult:
    """Best-of-``repeats`` wall time to produce ``count`` outputs into a sink."""
    if count < MIN_COUNT:
        raise ValueError(f"bench count must be >= {MIN_COUNT}")
    kind = ModeKind(kind)
    _time_once(spec, kind, CHUNK, seed, second)  # compile and warm caches
    best = min(_time_once(spec, kind, count, seed, second) for _ in range(repeats))
    label = kind.value if second is None else f"{kind.value}:{second}"
    return BenchResult(str(spec), label, count, best)
