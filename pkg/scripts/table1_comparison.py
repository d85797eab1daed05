"""Failure counts per evaluation mode for the nine shipped generators.

Prints a Table-1-style comparison (failures with suspicious counts in
brackets) and the run time of each battery.

    python scripts/table1_comparison.py --n 10000000 --seed 12345
"""

import argparse

from ratiorng.battery import run_battery
from ratiorng.generators import TABLE1, GeneratorSpec

MODES = ("direct", "direct2", "ratio")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10**7)
    ap.add_argument("--seed", type=int, default=12345)
    ap.add_argument("--details", action="store_true", help="list non-passing tests")
    args = ap.parse_args()

    print(f"{'generator':28s}" + "".join(f"{m:>10s}" for m in MODES) + "   ratio<=direct")
    not_worse = 0
    for name in TABLE1:
        spec = GeneratorSpec.parse(name)
        reports = {m: run_battery(spec, m, args.n, args.seed) for m in MODES}
        ok = reports["ratio"].failed <= reports["direct"].failed
        not_worse += ok
        cells = "".join(f"{reports[m].summary:>10s}" for m in MODES)
        print(f"{name:28s}{cells}   {'yes' if ok else 'NO'}", flush=True)
        if args.details:
            for m, r in reports.items():
                for o in r.outcomes:
                    if o.verdict.value != "pass":
                        print(f"    {m:8s} {o.test_name:11s} p={o.p_value:.3g} ({o.verdict.value})")
    print(f"\nratio no worse than direct for {not_worse}/{len(TABLE1)} generators")


if __name__ == "__main__":
    main()
