"""Exact KS distances of the three modes over a range of M, as TSV.

Columns give M times each distance, so the O(1/M) behaviour of the ratio
and direct modes and the O(1/M^2) behaviour of direct-2 read off directly.

    python scripts/ks_sweep.py --max-m 4096 --step 64 > ks.tsv
"""

import argparse

from ratiorng import theory


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-m", type=int, default=4)
    ap.add_argument("--max-m", type=int, default=1024)
    ap.add_argument("--step", type=int, default=1)
    args = ap.parse_args()

    print("m\tratio_x_m\tbound_x_m\tinterior_x_m\tinterior_bound_x_m\tdirect_x_m\tdirect2_x_m2\tvalues")
    for M in range(args.min_m, args.max_m + 1, args.step):
        r = theory.ks_distance_ratio(M)
        c = theory.ks_interior_bound_check(M)
        v = theory.ks_distance_direct(M)
        w = theory.ks_distance_direct2(M) if M <= theory.DIRECT2_CAP else None
        fields = [M, float(r.distance * M), float(r.bound * M),
                  float(c.max_interior_deviation * M), float(c.bound * M),
                  float(v.distance * M), "" if w is None else float(w.distance * M * M),
                  theory.value_count(M)]
        print("\t".join(f"{x:.6f}" if isinstance(x, float) else str(x) for x in fields), flush=True)


if __name__ == "__main__":
    main()
