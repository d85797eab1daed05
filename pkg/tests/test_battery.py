import json
import math

import numpy as np
import pytest
from scipy import stats

from ratiorng import battery
from ratiorng.battery import (
    BatteryReport, InsufficientSamples, SuiteConfig, TestOutcome, Verdict, classify_p,
    format_counts, run_battery,
)
from ratiorng.core import ContractViolation
from ratiorng.generators import GeneratorSpec

PCG = GeneratorSpec.parse("pcg64")


@pytest.mark.parametrize("p,verdict", [
    (0.5, Verdict.PASS), (1e-12, Verdict.FAIL), (1 - 1e-12, Verdict.FAIL),
    (1e-5, Verdict.SUSPICIOUS), (1 - 1e-5, Verdict.SUSPICIOUS), (1e-10, Verdict.SUSPICIOUS),
    (1e-4, Verdict.SUSPICIOUS), (2e-4, Verdict.PASS), (0.0, Verdict.FAIL), (1.0, Verdict.FAIL),
])
def test_classify(p, verdict):
    assert classify_p(p) is verdict


def test_classify_rejects_non_probability():
    with pytest.raises(ContractViolation):
        classify_p(1.5)


@pytest.mark.parametrize("failed,suspicious,text", [(42, 9, "42(9)"), (0, 1, "(1)"), (0, 0, "0"), (3, 0, "3")])
def test_format_counts(failed, suspicious, text):
    assert format_counts(failed, suspicious) == text


class TestNullDistributions:
    """p-value machinery against published critical values."""

    @pytest.mark.parametrize("x,df,p", [
        (3.841458820694124, 1, 0.05), (6.634896601021214, 1, 0.01), (18.307038053275146, 10, 0.05),
        (124.3421134, 100, 0.05),
    ])
    def test_chi2_tail(self, x, df, p):
        assert battery._chi2_sf(x, df) == pytest.approx(p, rel=1e-6)

    @pytest.mark.parametrize("level,critical", [(0.05, 1.3580986393225505), (0.01, 1.6276236115189502)])
    def test_kolmogorov_limit(self, level, critical):
        # asymptotic critical values of sqrt(n) D_n
        assert stats.kstwobign.isf(level) == pytest.approx(critical, rel=1e-6)

    def test_ks_finite_n_tail(self):
        # Massey's table: n = 10, alpha = 0.05 -> 0.40925
        assert stats.kstwo.sf(0.40925, 10) == pytest.approx(0.05, rel=1e-3)

    def test_poisson_upper(self):
        assert battery._poisson_upper(0, 3.0) == 1.0
        assert battery._poisson_upper(1, 3.0) == pytest.approx(1 - math.exp(-3))

    def test_expected_collisions_small_case(self):
        # 2 balls in 2 urns: collide with probability 1/2
        assert battery.expected_collisions(2, 2) == pytest.approx(0.5)


class TestIndividualTests:
    def test_chi2_perfect_counts_fail(self):
        u = (np.arange(1024 * 10) % 1024 + 0.5) / 1024
        o = battery.test_chi2_equidistribution(u, 1024)
        assert o.statistic == 0 and o.verdict is Verdict.FAIL

    def test_ks_constant_sample(self):
        o = battery.test_ks_uniform(np.full(100, 0.5))
        assert o.statistic == 0.5 and o.p_value < 1e-10 and o.verdict is Verdict.FAIL

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientSamples) as exc:
            battery.test_chi2_equidistribution(np.full(10, 0.5), 1024)
        assert exc.value.required == 5 * 1024
        with pytest.raises(InsufficientSamples):
            battery.test_birthday_spacings(np.full(100, 0.5))

    def test_gap_categories(self):
        t = battery.gap_categories(10**6, 0.0625)
        expected_tail = 10**6 * 0.0625 * (1 - 0.0625) ** t
        assert expected_tail * 0.0625 < 5 <= 10**6 * 0.0625 * 0.0625 * (1 - 0.0625) ** (t - 1)

    def test_gap_bad_interval(self):
        with pytest.raises(ContractViolation):
            battery.test_gap(np.full(10**4, 0.5), 0.5, 0.25)

    def test_birthday_on_strong_source(self):
        u = np.random.default_rng(3).random(4096 * 2 * 64)
        o = battery.test_birthday_spacings(u)
        assert o.verdict is Verdict.PASS
        assert o.n_used == 4096 * 2 * 64

    def test_birthday_bad_days(self):
        with pytest.raises(ContractViolation):
            battery.test_birthday_spacings(np.full(10**4, 0.5), days=1000, dims=2)

    def test_lattice_source_fails_birthday(self):
        # x/M for a tiny-modulus LCG: few distinct points, many equal spacings
        x = np.empty(4096 * 2 * 64)
        s = 1
        for i in range(x.size):
            s = (69069 * s + 1) % 2**16
            x[i] = (s + 0.5) / 2**16
        assert battery.test_birthday_spacings(x).verdict is Verdict.FAIL

    def test_serial_detects_correlated_pairs(self):
        u = np.random.default_rng(0).random(10**5)
        u[1::2] = u[0::2]
        assert battery.test_serial_pairs(u).verdict is Verdict.FAIL

    def test_collisions_strong_source(self):
        u = np.random.default_rng(5).random(2**14 * 32)
        assert battery.test_collisions(u).verdict is Verdict.PASS


class TestBattery:
    def test_report_shape_and_determinism(self):
        a = run_battery(PCG, "ratio", 10**5, 7)
        b = run_battery(PCG, "ratio", 10**5, 7)
        assert [o.test_name for o in a.outcomes] == ["ks", "chi2", "serial", "gap", "birthday", "collisions"]
        assert [o for o in a.outcomes] == [o for o in b.outcomes]
        assert a.failed == sum(o.verdict is Verdict.FAIL for o in a.outcomes)

    def test_segments_are_disjoint(self):
        # each test sees the next contiguous slice of the same stream
        cfg = SuiteConfig()
        sizes = [size for _, size in cfg.segments(10**5)]
        from ratiorng.core import generate
        from ratiorng.generators import build
        gen, mode = build(PCG, "direct", 11, None)
        stream = generate(gen, mode, sum(sizes))
        report = run_battery(PCG, "direct", 10**5, 11)
        start = 0
        for (name, size), outcome in zip(cfg.segments(10**5), report.outcomes):
            assert outcome == cfg.run(name, stream[start:start + size])
            start += size

    def test_tsv_and_json(self):
        r = run_battery(PCG, "direct", 10**5, 1)
        lines = r.to_tsv().splitlines()
        assert lines[0] == "test\tstatistic\tp\tverdict\tn" and len(lines) == 7
        d = json.loads(r.to_json())
        assert d["failed"] == r.failed and len(d["outcomes"]) == 6

    def test_minimum_n(self):
        with pytest.raises(ContractViolation):
            run_battery(PCG, "direct", 10**4, 1)

    def test_report_counts(self):
        mk = lambda v: TestOutcome("x", 0.0, 0.5, v, 1)  # noqa: E731
        r = BatteryReport("g", "direct", 1, 1, [mk(Verdict.FAIL), mk(Verdict.SUSPICIOUS), mk(Verdict.PASS)])
        assert (r.failed, r.suspicious, r.summary) == (1, 1, "1(1)")

    def test_minstd_direct_fails_birthday(self):
        r = run_battery(GeneratorSpec.parse("LCG(2^31-1,16807,0)"), "direct", 10**5, 12345)
        birthday = next(o for o in r.outcomes if o.test_name == "birthday")
        assert birthday.verdict is Verdict.FAIL
