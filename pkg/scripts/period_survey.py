"""Ratio-stream periods of miniature full-period LCGs.

For every ``a = 1 mod 4`` and a few odd increments, compares the detected
period of the ratio output with the pair period T1 of the base generator.

    python scripts/period_survey.py --max-exp 10
"""

import argparse
from collections import Counter

from ratiorng.generators import GeneratorSpec, detect_period, period_pair_length


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-exp", type=int, default=4)
    ap.add_argument("--max-exp", type=int, default=10)
    args = ap.parse_args()

    print("m\tgenerators\tviolations\tT0/T1 distribution")
    for e in range(args.min_exp, args.max_exp + 1):
        m = 2**e
        ratios: Counter = Counter()
        checked = violations = 0
        for a in range(1, m, 4):
            for c in sorted({1, 3, m - 1}):
                spec = GeneratorSpec.parse(f"lcg:m={m},a={a},c={c}")
                T1 = period_pair_length(detect_period(spec, "direct", 4 * m))
                T0 = detect_period(spec, "ratio", 4 * m)
                checked += 1
                violations += T1 % T0 != 0
                ratios[f"1/{T1 // T0}" if T1 % T0 == 0 else f"{T0}/{T1}"] += 1
        dist = ", ".join(f"{k}:{v}" for k, v in sorted(ratios.items()))
        print(f"{m}\t{checked}\t{violations}\t{dist}", flush=True)


if __name__ == "__main__":
    main()
