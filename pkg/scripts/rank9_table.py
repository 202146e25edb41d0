"""Rank-9 experiment with signal-block outliers.

    python3 scripts/rank9_table.py --scale 1.0 --reps 10    # n=1000, p=500, eta=1000
    python3 scripts/rank9_table.py --scale 0.5 --reps 3     # acceptance size
"""
import argparse

from sphsvd.simgen import RANK9, run_sweep, scaled, summarize, write_sweep_csv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scale", type=float, default=0.5)
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--methods", default="svd,spsvd")
    ap.add_argument("--out", default="rank9.csv")
    a = ap.parse_args()
    cfg = scaled(RANK9, a.scale)
    methods = a.methods.split(",")
    recs = run_sweep(cfg, [cfg.eta], methods, reps=a.reps)
    write_sweep_csv(recs, a.out)
    print(f"n={cfg.n} p={cfg.p} R={cfg.R} eta={cfg.eta:g} reps={a.reps}")
    print(f"{'method':8s} {'right':>7s} {'left':>7s} {'d ratio':>8s} {'time':>8s}")
    for m in methods:
        r = summarize(recs)[(m, cfg.eta)]
        print(f"{m:8s} {r['right_angle_deg']:7.2f} {r['left_angle_deg']:7.2f} "
              f"{r['d1_ratio']:8.3f} {r['median_wall_time_s']:8.3f}")


if __name__ == "__main__":
    main()
