"""A small statistical battery in the Knuth/TestU01 tradition.

Six tests, each taking doubles in (0, 1) and returning a p-value judged by
TestU01's bands: fail outside ``[1e-10, 1 - 1e-10]``, suspicious within
``1e-4`` of either end, pass otherwise.  ``run_battery`` feeds each test a
fresh contiguous segment of one stream.
"""

from __future__ import annotations

import enum
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .core import ContractViolation, ModeKind, generate
from .generators import GeneratorSpec, build

FAIL_LEVEL = 1e-10
SUSPICIOUS_LEVEL = 1e-4
MIN_BATTERY_N = 100_000


class Verdict(enum.Enum):
    PASS = "pass"
    SUSPICIOUS = "suspicious"
    FAIL = "fail"


class InsufficientSamples(ContractViolation):
    def __init__(self, test: str, required: int, got: int):
        super().__init__(f"{test} needs at least {required} samples, got {got}")
        self.required = required


def classify_p(p: float) -> Verdict:
    if not 0.0 <= p <= 1.0:
        raise ContractViolation(f"p-value {p!r} outside [0, 1]")
    if p < FAIL_LEVEL or p > 1.0 - FAIL_LEVEL:
        return Verdict.FAIL
    if p <= SUSPICIOUS_LEVEL or p >= 1.0 - SUSPICIOUS_LEVEL:
        return Verdict.SUSPICIOUS
    return Verdict.PASS


@dataclass(frozen=True)
class TestOutcome:
    test_name: str
    statistic: float
    p_value: float
    verdict: Verdict
    n_used: int

    __test__ = False  # not a pytest class


def _outcome(name: str, statistic: float, p: float, n: int) -> TestOutcome:
    p = min(max(float(p), 0.0), 1.0)
    return TestOutcome(name, float(statistic), p, classify_p(p), int(n))


def _require(name: str, samples: np.ndarray, required: int) -> np.ndarray:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size < required:
        raise InsufficientSamples(name, required, samples.size)
    return samples


def _chi2_sf(statistic: float, df: int) -> float:
    return float(special.gammaincc(df / 2.0, statistic / 2.0))


def _cells(u: np.ndarray, k: int) -> np.ndarray:
    c = (u * k).astype(np.int64)
    return np.minimum(c, k - 1)


# -- the tests -------------------------------------------------------------

def test_ks_uniform(samples) -> TestOutcome:
    """Two-sided Kolmogorov-Smirnov against U(0,1), exact finite-n tail."""
    u = np.sort(_require("ks", samples, 100))
    n = u.size
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - u)), float(np.max(u - (i - 1) / n)))
    return _outcome("ks", d, stats.kstwo.sf(d, n), n)


def test_chi2_equidistribution(samples, bins: int = 1024) -> TestOutcome:
    u = _require("chi2", samples, 5 * bins)
    counts = np.bincount(_cells(u, bins), minlength=bins)
    expected = u.size / bins
    stat = float(np.sum((counts - expected) ** 2) / expected)
    return _outcome("chi2", stat, _chi2_sf(stat, bins - 1), u.size)


def test_serial_pairs(samples, cells_per_axis: int = 32) -> TestOutcome:
    """Chi-square over non-overlapping pairs on a ``k x k`` grid."""
    k = cells_per_axis
    u = _require("serial", samples, 10 * k * k)
    pairs = u[: u.size // 2 * 2].reshape(-1, 2)
    idx = _cells(pairs[:, 0], k) * k + _cells(pairs[:, 1], k)
    counts = np.bincount(idx, minlength=k * k)
    expected = pairs.shape[0] / (k * k)
    stat = float(np.sum((counts - expected) ** 2) / expected)
    return _outcome("serial", stat, _chi2_sf(stat, k * k - 1), 2 * pairs.shape[0])


def gap_categories(n: int, p: float, min_expected: float = 5.0) -> int:
    """Largest gap length kept as its own category for ``n`` samples."""
    gaps = n * p
    t = int(math.floor(math.log(min_expected / (gaps * p)) / math.log1p(-p))) + 1
    return max(t, 1)


def test_gap(samples, alpha: float = 0.0, beta: float = 0.0625,
             max_gap: int | None = None) -> TestOutcome:
    """Chi-square on lengths of runs between visits to ``[alpha, beta)``."""
    p = beta - alpha
    if not 0 < p < 1:
        raise ContractViolation("gap test needs 0 <= alpha < beta <= 1, beta - alpha < 1")
    u = _require("gap", samples, int(math.ceil(50 / p)))
    t = max_gap if max_gap is not None else gap_categories(u.size, p)
    hits = np.flatnonzero((u >= alpha) & (u < beta))
    gaps = np.diff(hits) - 1
    g = gaps.size
    if g < 2:
        return _outcome("gap", float("inf"), 0.0, u.size)
    observed = np.bincount(np.minimum(gaps, t), minlength=t + 1).astype(np.float64)
    r = np.arange(t)
    probs = np.append(p * (1 - p) ** r, (1 - p) ** t)
    expected = g * probs
    stat = float(np.sum((observed - expected) ** 2 / expected))
    return _outcome("gap", stat, _chi2_sf(stat, t), u.size)


def _poisson_upper(observed: int, lam: float) -> float:
    """``P(X >= observed)`` for ``X ~ Poisson(lam)``."""
    return float(stats.poisson.sf(observed - 1, lam))


def test_birthday_spacings(samples, days: int = 2**32, draws: int = 4096,
                           dims: int = 2) -> TestOutcome:
    """Equal spacings among sorted birthdays, summed over replications.

    A birthday is a point in ``dims`` dimensions built from consecutive
    samples, ``days**(1/dims)`` cells per axis, flattened to one of ``days``
    values.  Each replication sorts ``draws`` birthdays and counts repeated
    values among the ``draws`` spacings (wrap-around included); the total is
    compared with Poisson(reps * draws**3 / (4 days)).
    """
    d = round(days ** (1.0 / dims))
    if d**dims != days:
        raise ContractViolation(f"days={days} is not a {dims}-th power")
    per = draws * dims
    u = _require("birthday", samples, per)
    reps = u.size // per
    coords = _cells(u[: reps * per], d).reshape(reps, draws, dims)
    y = np.zeros((reps, draws), dtype=np.int64)
    for j in range(dims):
        y = y * d + coords[:, :, j]
    y.sort(axis=1)
    spacings = np.empty_like(y)
    spacings[:, :-1] = np.diff(y, axis=1)
    spacings[:, -1] = y[:, 0] + days - y[:, -1]
    spacings.sort(axis=1)
    collisions = int(np.count_nonzero(spacings[:, 1:] == spacings[:, :-1]))
    lam = reps * draws**3 / (4.0 * days)
    return _outcome("birthday", collisions, _poisson_upper(collisions, lam), reps * per)


def expected_collisions(urns: int, balls: int) -> float:
    return balls - urns + urns * math.exp(balls * math.log1p(-1.0 / urns))


def test_collisions(samples, urns: int = 2**20, balls: int = 2**14) -> TestOutcome:
    """Balls landing in already-occupied urns, Poisson total over replications."""
    u = _require("collisions", samples, balls)
    reps = u.size // balls
    cells = _cells(u[: reps * balls], urns).reshape(reps, balls)
    cells.sort(axis=1)
    collisions = int(np.count_nonzero(cells[:, 1:] == cells[:, :-1]))
    lam = reps * expected_collisions(urns, balls)
    return _outcome("collisions", collisions, _poisson_upper(collisions, lam), reps * balls)


# -- the battery -----------------------------------------------------------

@dataclass(frozen=True)
class SuiteConfig:
    """Per-test parameters; segment sizes scale with the battery's ``n``."""

    ks_fraction: float = 0.1
    chi2_bins: int = 1024
    serial_cells: int = 32
    gap_alpha: float = 0.0
    gap_beta: float = 0.0625
    birthday_days: int = 2**32
    birthday_draws: int = 4096
    birthday_reps: int = 64
    birthday_dims: int = 2
    collision_urns: int = 2**20
    collision_balls: int = 2**14
    collision_reps: int = 32

    def segments(self, n: int) -> list[tuple[str, int]]:
        return [
            ("ks", int(n * self.ks_fraction)),
            ("chi2", n),
            ("serial", 2 * n),
            ("gap", n),
            ("birthday", self.birthday_draws * self.birthday_reps * self.birthday_dims),
            ("collisions", self.collision_balls * self.collision_reps),
        ]

    def run(self, name: str, u: np.ndarray) -> TestOutcome:
        if name == "ks":
            return test_ks_uniform(u)
        if name == "chi2":
            return test_chi2_equidistribution(u, self.chi2_bins)
        if name == "serial":
            return test_serial_pairs(u, self.serial_cells)
        if name == "gap":
            return test_gap(u, self.gap_alpha, self.gap_beta)
        if name == "birthday":
            return test_birthday_spacings(u, self.birthday_days, self.birthday_draws,
                                          self.birthday_dims)
        if name == "collisions":
            return test_collisions(u, self.collision_urns, self.collision_balls)
        raise KeyError(name)


@dataclass
class BatteryReport:
    generator: str
    mode: str
    n: int
    seed: int
    outcomes: list[TestOutcome] = field(default_factory=list)
    elapsed_seconds: float = 0.0

    @property
    def failed(self) -> int:
        return sum(o.verdict is Verdict.FAIL for o in self.outcomes)

    @property
    def suspicious(self) -> int:
        return sum(o.verdict is Verdict.SUSPICIOUS for o in self.outcomes)

    @property
    def summary(self) -> str:
        return format_counts(self.failed, self.suspicious)

    def to_tsv(self) -> str:
        rows = ["test\tstatistic\tp\tverdict\tn"]
        for o in self.outcomes:
            rows.append(f"{o.test_name}\t{o.statistic!r}\t{o.p_value!r}\t{o.verdict.value}\t{o.n_used}")
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return {
            "generator": self.generator,
            "mode": self.mode,
            "n": self.n,
            "seed": self.seed,
            "failed": self.failed,
            "suspicious": self.suspicious,
            "elapsed_seconds": self.elapsed_seconds,
            "outcomes": [
                {"test": o.test_name, "statistic": o.statistic, "p": o.p_value,
                 "verdict": o.verdict.value, "n": o.n_used}
                for o in self.outcomes
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def format_counts(failed: int, suspicious: int) -> str:
    """Failures with suspicious results in brackets, e.g. ``42(9)``, ``(1)``, ``0``."""
    if suspicious == 0:
        return str(failed)
    if failed == 0:
        return f"({suspicious})"
    return f"{failed}({suspicious})"


def run_battery(spec: GeneratorSpec, mode: ModeKind | str, n: int, seed: int,
                second: GeneratorSpec | None = None,
                config: SuiteConfig = SuiteConfig()) -> BatteryReport:
    if n < MIN_BATTERY_N:
        raise ContractViolation(f"battery needs n >= {MIN_BATTERY_N}, got {n}")
    kind = ModeKind(mode)
    gen, ev = build(spec, kind, seed, second)
    label = kind.value if second is None else f"{kind.value}:{second}"
    report = BatteryReport(str(spec), label, n, seed)
    start = time.perf_counter()
    for name, size in config.segments(n):
        u = generate(gen, ev, size)
        report.outcomes.append(config.run(name, u))
    report.elapsed_seconds = time.perf_counter() - start
    return report


for _f in (test_ks_uniform, test_chi2_equidistribution, test_serial_pairs, test_gap,
           test_birthday_spacings, test_collisions):
    _f.__test__ = False  # keep pytest from collecting re-exported tests
del _f
