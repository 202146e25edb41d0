"""Row/column deletion lower bounds on the 60 x 30 generator, as a table.

Rows with large bounds need k up to 6 out of 60 rows (C(60, 6) ~ 5e7 subsets),
which takes hours; restrict with --scales / --ranks for a quick run.

    python3 scripts/bound_table.py --scales 0.3 --ranks 3
"""
import argparse
import time

from sphsvd.cli import BOUND_HEADER, appendix_table


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scales", default="0.3,0.45,0.6")
    ap.add_argument("--ranks", default="3,1")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--kmax", type=int, default=6)
    ap.add_argument("--budget", type=int, default=10**9)
    ap.add_argument("--threads", type=int, default=1)
    a = ap.parse_args()
    t0 = time.perf_counter()
    rows = appendix_table([float(x) for x in a.scales.split(",")],
                          {int(x) for x in a.ranks.split(",")}, a.seeds, a.kmax, a.budget,
                          a.threads, verbose=True)
    print("\t".join(BOUND_HEADER))
    for r in rows:
        print("\t".join(str(r[h]) for h in BOUND_HEADER))
    print(f"# {time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()
