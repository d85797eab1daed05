"""Command line: ``ratiorng {gen,theory,battery,bench,period}``.

Tabular output is TSV with a header row; ``--json`` switches to JSON.
Exit codes: 0 success, 1 a checked bound was violated, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import theory
from .battery import MIN_BATTERY_N, run_battery
from .bench import MIN_COUNT, bench
from .core import CHUNK, ContractViolation, ModeKind, generate
from .generators import GRAMMAR, GeneratorSpec, SpecError, build, detect_period, parse_mode, period_pair_length

FORMATS = ("f64-text", "u32-le", "u64-le")


class UsageError(Exception):
    pass


def _spec(text: str) -> GeneratorSpec:
    try:
        return GeneratorSpec.parse(text)
    except SpecError as exc:
        raise UsageError(str(exc)) from None


def _mode(text: str) -> tuple[ModeKind, GeneratorSpec | None]:
    try:
        return parse_mode(text)
    except SpecError as exc:
        raise UsageError(str(exc)) from None


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r} (use a/b)") from None


def _dec(x: Fraction) -> str:
    return repr(float(x))


def _emit(args, header: list[str], rows: list[list], records: list[dict]) -> None:
    if args.json:
        payload = records[0] if len(records) == 1 else records
        print(json.dumps(payload, indent=2))
        return
    print("\t".join(header))
    for row in rows:
        print("\t".join(str(v) for v in row))


def encode(u: np.ndarray, fmt: str) -> bytes:
    """Serialize outputs; binary words are ``floor(u * 2**w)``, little-endian."""
    if fmt == "f64-text":
        return ("\n".join(f"{x:.17g}" for x in u.tolist()) + "\n").encode()
    if fmt == "u32-le":
        w = np.minimum(np.floor(u * 2.0**32), 2.0**32 - 1).astype(np.uint64)
        return w.astype("<u4").tobytes()
    if fmt == "u64-le":
        # u <= 1 - 2**-53, so u * 2**64 <= 2**64 - 2**11 converts safely
        return np.floor(u * 2.0**64).astype(np.uint64).astype("<u8").tobytes()
    raise UsageError(f"unknown format {fmt!r}")


def cmd_gen(args) -> int:
    spec = _spec(args.spec)
    kind, second = _mode(args.mode)
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    gen, mode = build(spec, kind, args.seed, second)
    out = sys.stdout.buffer
    remaining = args.count
    while remaining:
        k = min(remaining, CHUNK)
        out.write(encode(generate(gen, mode, k), args.format))
        remaining -= k
    out.flush()
    return 0


def cmd_theory(args) -> int:
    M = args.m
    try:
        if args.what == "cdf":
            if args.t is None:
                raise UsageError("theory cdf needs --t a/b")
            t = _fraction(args.t)
            value = theory.ratio_cdf_eval(M, t)
            _emit(args, ["m", "t", "cdf", "decimal"], [[M, t, value, _dec(value)]],
                  [{"m": M, "t": str(t), "cdf": str(value), "decimal": float(value)}])
            return 0
        if args.what == "count":
            n = theory.value_count(M)
            approx = theory.value_count_asymptotic(M)
            _emit(args, ["m", "count", "asymptotic"], [[M, n, repr(approx)]],
                  [{"m": M, "count": n, "asymptotic": approx}])
            return 0
        if args.what == "ks":
            kind = args.mode or "ratio"
            if kind == "ratio":
                r = theory.ks_distance_ratio(M, cap=args.cap or theory.KS_CAP)
            elif kind == "direct":
                r = theory.ks_distance_direct(M)
            elif kind == "direct2":
                r = theory.ks_distance_direct2(M, cap=args.cap or theory.DIRECT2_CAP)
            else:
                raise UsageError(f"theory ks supports direct, direct2, ratio; got {kind!r}")
            within = "true" if r.within_bound else "false"
            _emit(args,
                  ["mode", "m", "distance", "decimal", "attained_at", "side", "bound", "within_bound"],
                  [[r.mode, M, r.distance, _dec(r.distance), r.attained_at, r.side.value,
                    r.bound, within]],
                  [{"mode": r.mode, "m": M, "distance": str(r.distance),
                    "decimal": float(r.distance), "attained_at": str(r.attained_at),
                    "side": r.side.value, "bound": str(r.bound),
                    "within_bound": r.within_bound}])
            return 0 if r.within_bound else 1
        if args.what == "interior":
            c = theory.ks_interior_bound_check(M, cap=args.cap or theory.KS_CAP)
            _emit(args,
                  ["m", "max_interior", "decimal", "times_m", "attained_at", "bound", "within"],
                  [[M, c.max_interior_deviation, _dec(c.max_interior_deviation),
                    repr(float(c.max_interior_deviation * M)), c.attained_at, c.bound,
                    "true" if c.within else "false"]],
                  [{"m": M, "max_interior": str(c.max_interior_deviation),
                    "decimal": float(c.max_interior_deviation),
                    "attained_at": str(c.attained_at), "bound": str(c.bound),
                    "within": c.within}])
            return 0 if c.within else 1
    except ContractViolation as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown theory query {args.what!r}")


def cmd_battery(args) -> int:
    spec = _spec(args.spec)
    modes = [_mode(m.strip()) for m in args.modes.split(",") if m.strip()]
    if not modes:
        raise UsageError("--modes is empty")
    if args.n < MIN_BATTERY_N:
        raise UsageError(f"--n must be >= {MIN_BATTERY_N}")
    reports = [run_battery(spec, kind, args.n, args.seed, second) for kind, second in modes]
    if args.json:
        print(json.dumps([r.to_dict() for r in reports], indent=2))
        return 0
    if args.details:
        for r in reports:
            print(f"# {r.generator} {r.mode}")
            sys.stdout.write(r.to_tsv())
    header = ["generator", "mode", "failed", "suspicious", "result", "elapsed_seconds"]
    rows = [[r.generator, r.mode, r.failed, r.suspicious, r.summary, f"{r.elapsed_seconds:.2f}"]
            for r in reports]
    if args.pretty:
        widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
        for row in [header, *rows]:
            print("  ".join(str(v).ljust(w) for v, w in zip(row, widths)).rstrip())
    else:
        print("\t".join(header))
        for row in rows:
            print("\t".join(str(v) for v in row))
    return 0


def cmd_bench(args) -> int:
    spec = _spec(args.spec)
    kind, second = _mode(args.mode)
    if args.count < MIN_COUNT:
        raise UsageError(f"--count must be >= {MIN_COUNT}")
    r = bench(spec, kind, args.count, args.seed, second)
    _emit(args, ["generator", "mode", "count", "elapsed_seconds", "nanos_per_output"],
          [[r.generator, r.mode, r.count, f"{r.elapsed_seconds:.6f}", f"{r.nanos_per_output:.3f}"]],
          [{"generator": r.generator, "mode": r.mode, "count": r.count,
            "elapsed_seconds": r.elapsed_seconds, "nanos_per_output": r.nanos_per_output}])
    return 0


def cmd_period(args) -> int:
    spec = _spec(args.spec)
    kind, second = _mode(args.mode)
    if args.cap < 1:
        raise UsageError("--cap must be >= 1")
    period = detect_period(spec, kind, args.cap, args.seed, second)
    base = detect_period(spec, ModeKind.DIRECT, args.cap, args.seed)
    t1 = period_pair_length(base) if base is not None else None
    divides = None
    if kind in (ModeKind.RATIO, ModeKind.RATIO_TWO_SOURCE) and period and t1:
        divides = t1 % period == 0

    def show(v):
        return "exceeded-cap" if v is None else v

    _emit(args, ["generator", "mode", "period", "base_period", "t1", "divides_t1"],
          [[spec, kind.value, show(period), show(base), show(t1),
            "n/a" if divides is None else str(divides).lower()]],
          [{"generator": str(spec), "mode": kind.value, "period": period,
            "base_period": base, "t1": t1, "divides_t1": divides}])
    return 1 if divides is False else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ratiorng",
        description="Ratio-transformed random number generators: streams, exact theory, tests.",
        epilog=f"generator specs: {GRAMMAR}",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, json_flag=True):
        if json_flag:
            sp.add_argument("--json", action="store_true", help="emit JSON instead of TSV")

    g = sub.add_parser("gen", help="write an output stream to stdout")
    g.add_argument("spec")
    g.add_argument("--mode", default="direct", help="direct, direct2, ratio or ratio2:<spec>")
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--format", choices=FORMATS, default="f64-text")
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("theory", help="exact distribution queries")
    t.add_argument("what", choices=("cdf", "ks", "interior", "count"))
    t.add_argument("--m", type=int, required=True)
    t.add_argument("--t", help="rational a/b (cdf only)")
    t.add_argument("--mode", help="ks only: direct, direct2 or ratio (default)")
    t.add_argument("--cap", type=int, help="override the quadratic-cost cap on M")
    common(t)
    t.set_defaults(func=cmd_theory)

    b = sub.add_parser("battery", help="run the test battery per mode")
    b.add_argument("spec")
    b.add_argument("--modes", default="direct,direct2,ratio")
    b.add_argument("--n", type=int, default=10**7)
    b.add_argument("--seed", type=int, default=12345)
    b.add_argument("--details", action="store_true", help="also print per-test TSV")
    b.add_argument("--pretty", action="store_true", help="aligned table instead of TSV")
    common(b)
    b.set_defaults(func=cmd_battery)

    be = sub.add_parser("bench", help="time generation")
    be.add_argument("spec")
    be.add_argument("--mode", default="direct")
    be.add_argument("--count", type=int, default=10**8)
    be.add_argument("--seed", type=int, default=1)
    common(be)
    be.set_defaults(func=cmd_bench)

    pe = sub.add_parser("period", help="detect output periods of miniature generators")
    pe.add_argument("spec")
    pe.add_argument("--mode", default="ratio")
    pe.add_argument("--cap", type=int, required=True)
    pe.add_argument("--seed", type=int, default=1)
    common(pe)
    pe.set_defaults(func=cmd_period)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "json"):
        args.json = False
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream closed early (e.g. `| head`); not an error for a stream
        sys.stderr.close()
        return 0
    except (UsageError, ContractViolation) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
