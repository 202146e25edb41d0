"""Outlier-magnitude sweep on the 200 x 100 rank-3 generator.

    python3 scripts/fig1_sweep.py --reps 100 --out fig1.csv
"""
import argparse

import numpy as np

from sphsvd.simgen import FIG1, run_sweep, summarize, write_sweep_csv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--etas", default="0,100,200,300,400,500,600,700,800,900,1000")
    ap.add_argument("--methods", default="svd,spsvd,elsvd")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="fig1_sweep.csv")
    a = ap.parse_args()
    etas = [float(x) for x in a.etas.split(",")]
    methods = a.methods.split(",")
    recs = run_sweep(FIG1.replace(seed=a.seed), etas, methods, reps=a.reps)
    write_sweep_csv(recs, a.out)
    s = summarize(recs)
    print(f"{'method':8s} {'eta':>7s} {'left':>7s} {'right':>7s} {'d1/d1':>7s} {'time':>8s}")
    for m in methods:
        for e in etas:
            r = s[(m, e)]
            print(f"{m:8s} {e:7.0f} {r['left_angle_deg']:7.2f} {r['right_angle_deg']:7.2f} "
                  f"{r['d1_ratio']:7.3f} {r['median_wall_time_s']:8.4f}")
    print(f"wrote {a.out} ({len(recs)} rows, {int(np.sum([r.failed for r in recs]))} failed)")


if __name__ == "__main__":
    main()
