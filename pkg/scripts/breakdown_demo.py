"""Randomized breakdown probes for SVD, Huber ELSVD and SpSVD.

    python3 scripts/breakdown_demo.py
"""
import argparse

from sphsvd.robustness import BlockSize, breakdown_probe, lower_bound_nR
from sphsvd.simgen import SimConfig, gen_instance


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--seed", type=int, default=3)
    a = ap.parse_args()
    mags = [1e2, 1e4, 1e6, 1e8]
    X = gen_instance(SimConfig(n=50, p=20, R=1, singular_values=(30.0,), outlier_mode="none",
                               seed=a.seed)).X_clean
    nb = lower_bound_nR(X, 1, k_max=1)
    print(f"50x20 instance: n_R {nb.label()} (k=1 infimum {nb.per_k_infimum[0][1]:.3f})")
    for stat, block in [("svd-right", (1, 20)), ("elsvd-right", (1, 20)),
                        ("spsvd-right", (1, 20)), ("svd-left", (2, 1)),
                        ("elsvd-left", (2, 1)), ("spsvd-left", (2, 1))]:
        r = breakdown_probe(stat, X, BlockSize(*block), mags, trials=a.trials, seed=a.seed)
        print(f"{stat:12s} block {block}: max angle {r.max_angle_deg:6.2f} deg "
              f"at {r.magnitude_at_max:.0e} ({r.pattern_at_max}) broke_down={r.broke_down}")


if __name__ == "__main__":
    main()
