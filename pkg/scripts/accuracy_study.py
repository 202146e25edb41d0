"""Mean eigenvector error of SpSVD against sample size and outlier fraction.

    python3 scripts/accuracy_study.py --reps 50
"""
import argparse

from sphsvd.simgen import accuracy_study


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=50)
    ap.add_argument("--p", type=int, default=10)
    ap.add_argument("--R", type=int, default=1)
    a = ap.parse_args()
    for title, ns, eps in [("clean, growing n", [200, 400, 800, 1600], [0.0]),
                           ("n=2000, growing eps", [2000], [0.01, 0.05, 0.1])]:
        print(f"# {title}")
        for r in accuracy_study(ns, a.p, eps, reps=a.reps, R=a.R):
            print(f"n={r['n']:5d} eps={r['epsilon']:.2f} j={r['j']} mean_error={r['mean_error']:.4f}")


if __name__ == "__main__":
    main()
