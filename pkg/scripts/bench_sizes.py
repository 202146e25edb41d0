"""Wall-time scaling of SpSVD against truncated SVD (same as `sphsvd bench`).

    python3 scripts/bench_sizes.py --out bench.csv
"""
import sys

from sphsvd.cli import main

if __name__ == "__main__":
    sys.exit(main(["bench", *sys.argv[1:]] if "--out" in sys.argv else
                  ["bench", "--out", "bench.csv", *sys.argv[1:]]))
