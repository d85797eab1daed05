"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict (printed in the terminal
summary and to stdout) before asserting.  Run alone with
``pytest tests/test_acceptance.py -s``.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_LINES
from ratiorng import theory
from ratiorng.battery import Verdict, run_battery
from ratiorng.bench import bench
from ratiorng.generators import TABLE1, GeneratorSpec, detect_period, period_pair_length

KS_SWEEP = range(4, 4097)


def record(n: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert ok, line


def test_01_exact_cdf_oracle():
    mismatches, checked = [], 0
    for M in range(3, 129):
        cdf = theory.ratio_cdf(M)
        for t in cdf.points:
            checked += 1
            if theory.ratio_cdf_eval(M, t) != theory.brute_force_cdf(M, t):
                mismatches.append((M, t))
    record(1, not mismatches,
           f"closed-form cdf == brute force at {checked} jump points, M=3..128; mismatches {len(mismatches)}")


@pytest.mark.slow
def test_02_ks_bound_sweep():
    bad = [M for M in KS_SWEEP if not theory.ks_distance_ratio(M).within_bound]
    d10 = theory.ks_distance_ratio(10).distance
    ok = not bad and d10 == Fraction(7, 100)
    record(2, ok, f"Delta_Y <= max(eps0, eps1) for M=4..4096 (violations {len(bad)}); "
                  f"Delta_Y(10) = {d10}")


@pytest.mark.slow
def test_03_interior_bound_sweep():
    bad, worst, worst_m = [], Fraction(0), None
    for M in KS_SWEEP:
        c = theory.ks_interior_bound_check(M)
        if not c.within:
            bad.append(M)
        scaled = c.max_interior_deviation * M
        if scaled > worst:
            worst, worst_m = scaled, M
    half = Fraction(7, 4) - Fraction(math.sqrt(2))   # the smaller constant, for the log only
    record(3, not bad,
           f"interior max <= 0.6715730/M + 2/M^2 for M=4..4096 (violations {len(bad)}); "
           f"max M*interior = {float(worst):.5f} at M={worst_m} (vs 7/4-sqrt2 = {float(half):.5f})")


def test_04_direct_bounds():
    bad_v = [M for M in range(2, 4097) if not theory.ks_distance_direct(M).within_bound]
    bad_w = [M for M in range(2, 4097) if not theory.ks_distance_direct2(M).within_bound]
    record(4, not bad_v and not bad_w,
           f"Delta_V <= 1/(2M) and Delta_W <= 1/(2M^2) exactly for M=2..4096 "
           f"(violations {len(bad_v)}, {len(bad_w)})")


def test_05_value_counting():
    bad = [M for M in range(3, 4097) if theory.value_count(M) - 2 != theory.farey_length(M)]
    small = [M for M in range(3, 200) if theory.value_count(M) - 2 != len(theory.farey_enumerate(M))]
    n = theory.value_count(10**4)
    a = theory.value_count_asymptotic(10**4)
    rel = abs(n - a - 2) / a
    ok = theory.value_count(10) == 29 and not bad and not small and rel < 0.01
    record(5, ok, f"value_count(10)={theory.value_count(10)}; count-2 == Farey length for M<=4096 "
                  f"(mismatches {len(bad) + len(small)}); relative error at 1e4 = {rel:.2e}")


def test_06_continuous_ratio():
    r = theory.continuous_ratio_property_test(10**6, np.random.default_rng(20240601))
    record(6, r.passed, f"sqrt(n) D_n = {math.sqrt(r.n) * r.ks_statistic:.4f} "
                        f"< {r.critical:.4f} (n=1e6, level 1e-4)")


@pytest.mark.slow
def test_07_battery_calibration():
    spec = GeneratorSpec.parse("pcg64")
    full = run_battery(spec, "direct", 10**7, 12345)
    pvals: dict[str, list[float]] = {}
    for seed in range(200):
        for o in run_battery(spec, "direct", 10**5, 1000 + seed).outcomes:
            pvals.setdefault(o.test_name, []).append(o.p_value)
    meta = {name: stats.kstest(ps, "uniform").pvalue for name, ps in pvals.items()}
    ok = full.failed == 0 and all(p > 1e-3 for p in meta.values())
    worst = min(meta, key=meta.get)
    record(7, ok, f"pcg64 n=1e7 failures {full.failed}; meta-KS over 200 runs: "
                  f"min p = {meta[worst]:.3g} ({worst})")


@pytest.mark.slow
def test_08_table1_direction():
    rows = []
    for name in TABLE1:
        spec = GeneratorSpec.parse(name)
        d = run_battery(spec, "direct", 10**7, 12345)
        r = run_battery(spec, "ratio", 10**7, 12345)
        rows.append((name, d.failed, r.failed))
    not_worse = sum(r <= d for _, d, r in rows)
    minstd = next(row for row in rows if row[0] == "LCG(2^31-1,16807,0)")
    ok = not_worse >= 7 and minstd[2] < minstd[1]
    record(8, ok, f"ratio <= direct failures for {not_worse}/9 generators; "
                  f"MINSTD direct {minstd[1]} vs ratio {minstd[2]}")


@pytest.mark.slow
def test_09_timing_bracket():
    spec = GeneratorSpec.parse("LCG(2^63,5^19,1)")
    direct = bench(spec, "direct", 10**8)
    ratio = bench(spec, "ratio", 10**8)
    factor = ratio.elapsed_seconds / direct.elapsed_seconds
    record(9, 1.5 <= factor <= 6.0,
           f"ratio/direct time for 1e8 outputs = {factor:.2f}x "
           f"({ratio.elapsed_seconds:.3f}s / {direct.elapsed_seconds:.3f}s), bracket [1.5, 6]")


@pytest.mark.slow
def test_10_period_divisor():
    checked, violations, wrong_base = 0, [], []
    for e in range(4, 11):
        m = 2**e
        for a in range(1, m, 4):
            for c in sorted({1, 3, m - 1}):
                spec = GeneratorSpec.parse(f"lcg:m={m},a={a},c={c}")
                T = detect_period(spec, "direct", 4 * m)
                T0 = detect_period(spec, "ratio", 4 * m)
                checked += 1
                if T != m:
                    wrong_base.append(str(spec))
                elif period_pair_length(T) % T0:
                    violations.append(str(spec))
    record(10, not violations and not wrong_base,
           f"ratio period divides T1 for {checked - len(violations)}/{checked} full-period LCGs, "
           f"m=2^4..2^10 (violations {len(violations)})")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
