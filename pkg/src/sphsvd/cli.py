"""``sphsvd`` command line: decompose, simulate, bound, probe, bench.

Exit codes: 0 success, 2 usage or input error, 3 numeric failure, 4 enumeration
budget exceeded. Every option also reads a default from the environment
variable ``SPHSVD_<OPTION>`` (dashes become underscores, e.g. ``SPHSVD_SEED``,
``SPHSVD_THREADS``). Precedence is flag > environment > config file > preset.
"""
from __future__ import annotations

import argparse
import collections
import csv
import json
import math
import os
import sys
import time

import numpy as np

from .baselines import HuberConfig, elsvd_decompose
from .errors import (ConvergenceError, DegenerateInputError, EnumerationBudgetError,
                     MatrixFormatError, ParameterError)
from .matcore import f1_norm, read_matrix_csv, truncated_svd, write_matrix_csv
from .robustness import (DEFAULT_BUDGET, DEFAULT_KMAX, DEFAULT_THRESHOLD_DEG, STATS,
                         BlockSize, breakdown_probe, lower_bound_nR, lower_bound_pR)
from .simgen import (FIG1, METHODS, OUTLIER_MODES, RANK9, SimConfig, gen_instance, run_sweep,
                     summarize, write_sweep_csv)
from .spsvd import spsvd_decompose

ENV_PREFIX = "SPHSVD_"
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_BUDGET = 0, 2, 3, 4

RESULT_KEYS = ("converged", "d", "method", "objectives", "pair_indices", "rank", "seed",
               "shape", "triples")
BENCH_HEADER = ("n", "p", "method", "rank", "reps", "median_wall_time_s", "ratio_to_svd",
                "failed")
BOUND_HEADER = ("singular_values", "R", "n_R", "p_R", "seeds", "n_R_per_seed", "p_R_per_seed")

PRESET_ETAS = {"fig1": (0.0, 250.0, 500.0, 750.0, 1000.0), "rank9": (1000.0,)}
APPENDIX_ROWS = ((3, (80.0, 70.0, 60.0)), (1, (60.0,)))
APPENDIX_SCALES = (0.3, 0.45, 0.6)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing helpers


def _env(dest, default):
    return os.environ.get(ENV_PREFIX + dest.upper(), default)


def _pos_int(s):
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _float_list(s):
    try:
        return tuple(float(x) for x in str(s).split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}")


def _name_list(s):
    return tuple(x.strip() for x in str(s).split(",") if x.strip())


def _block(s):
    try:
        k, l = (int(x) for x in str(s).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"block must be 'k,l', got {s!r}")
    if k < 1 or l < 1:
        raise argparse.ArgumentTypeError("block entries must be >= 1")
    return k, l


def _sizes(s):
    out = []
    for tok in _name_list(s):
        try:
            n, p = (int(x) for x in tok.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"size must be 'n:p', got {tok!r}")
        if n < 1 or p < 1:
            raise argparse.ArgumentTypeError(f"size must be positive, got {tok!r}")
        out.append((n, p))
    if not out:
        raise argparse.ArgumentTypeError("no sizes given")
    return tuple(out)


def _add(p, *flags, dest=None, default=None, **kw):
    dest = dest or flags[-1].lstrip("-").replace("-", "_")
    default = _env(dest, default)
    if default is not None and isinstance(default, str) and "type" in kw:
        default = kw["type"](default)
    p.add_argument(*flags, dest=dest, default=default, **kw)


def build_parser():
    ap = argparse.ArgumentParser(prog="sphsvd", description="Spherically normalized SVD toolkit")
    common = argparse.ArgumentParser(add_help=False)
    _add(common, "--threads", type=_pos_int, default=os.cpu_count() or 1,
         help="worker bound for sweeps and enumeration (default: available cores)")
    _add(common, "--seed", type=int, help="random seed (default 0)")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", parents=[common], help="rank-R decomposition of a CSV matrix")
    d.add_argument("matrix")
    _add(d, "--rank", type=_pos_int, required=_env("rank", None) is None)
    _add(d, "--method", choices=METHODS, default="spsvd")
    _add(d, "--out", required=_env("out", None) is None)
    _add(d, "--tol", type=float, default=1e-10)
    _add(d, "--huber-delta", type=float, default=HuberConfig.delta)

    s = sub.add_parser("simulate", parents=[common], help="outlier sweep on synthetic data")
    _add(s, "--preset", choices=("fig1", "rank9", "custom"), default="fig1")
    _add(s, "--config", help="flat key=value file (keys match the long flags)")
    _add(s, "--n", type=_pos_int)
    _add(s, "--p", type=_pos_int)
    _add(s, "--rank", type=_pos_int)
    _add(s, "--singular-values", type=_float_list)
    _add(s, "--etas", type=_float_list)
    _add(s, "--reps", type=_pos_int)
    _add(s, "--methods", type=_name_list)
    _add(s, "--outlier-mode", choices=OUTLIER_MODES)
    _add(s, "--outlier-rows-frac", type=float)
    _add(s, "--outlier-cols-frac", type=float)
    _add(s, "--scale", type=float, help="multiply n, p, singular values and etas")
    _add(s, "--huber-delta", type=float)
    _add(s, "--out", required=_env("out", None) is None)

    b = sub.add_parser("bound", parents=[common], help="row/column breakdown lower bounds")
    b.add_argument("matrix", nargs="?")
    _add(b, "--preset", choices=("appendix-table",))
    _add(b, "--rank", type=_pos_int)
    _add(b, "--kmax", type=_pos_int, default=DEFAULT_KMAX)
    _add(b, "--budget", type=_pos_int, default=DEFAULT_BUDGET)
    _add(b, "--scales", type=_float_list, default=APPENDIX_SCALES)
    _add(b, "--ranks", type=_float_list, default=(3, 1))
    _add(b, "--seeds", type=_pos_int, default=5, help="preset: number of seeds (0..N-1)")
    _add(b, "--verbose", action="store_true", default=False)
    _add(b, "--out", help="write JSON (matrix mode) or CSV (preset mode)")

    pr = sub.add_parser("probe", parents=[common], help="randomized breakdown probe")
    pr.add_argument("matrix")
    _add(pr, "--stat", choices=tuple(STATS), required=_env("stat", None) is None)
    _add(pr, "--block", type=_block, required=_env("block", None) is None)
    _add(pr, "--magnitudes", type=_float_list, default=(1e2, 1e4, 1e6, 1e8))
    _add(pr, "--trials", type=_pos_int, default=5)
    _add(pr, "--rank", type=_pos_int, default=1)
    _add(pr, "--threshold", type=float, default=DEFAULT_THRESHOLD_DEG)
    _add(pr, "--out")

    be = sub.add_parser("bench", parents=[common], help="median wall times per size and method")
    _add(be, "--sizes", type=_sizes, default="200:100,500:250,1000:500,2000:1000")
    _add(be, "--rank", type=_pos_int, default=3)
    _add(be, "--methods", type=_name_list, default=("svd", "spsvd"))
    _add(be, "--reps", type=_pos_int, default=3)
    _add(be, "--out", required=_env("out", None) is None)
    return ap


# ---------------------------------------------------------------------------
# decompose


def _decompose(X, method, R, seed, tol, delta):
    if method == "svd":
        fac = truncated_svd(X, R, tol=tol, seed=seed)
        return fac, None, None, True
    if method == "spsvd":
        res = spsvd_decompose(X, R, tol=tol, seed=seed)
        return res, [list(map(int, ab)) for ab in res.pair_indices], list(res.objective_values), True
    fac = elsvd_decompose(X, R, HuberConfig(delta=delta), seed=seed)
    return fac, None, None, bool(fac.converged)


def result_dict(fac, method, R, seed, shape, pairs, objectives, converged):
    return {
        "converged": converged,
        "d": [float(x) for x in fac.d],
        "method": method,
        "objectives": objectives,
        "pair_indices": pairs,
        "rank": R,
        "seed": seed,
        "shape": list(shape),
        "triples": [{"d": float(t.d), "u": t.u.tolist(), "v": t.v.tolist()} for t in fac.triples],
    }


def dump_json(obj, path=None):
    text = json.dumps(obj, sort_keys=True, indent=1) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def cmd_decompose(a):
    if a.method == "elsvd" and not a.huber_delta > 0:
        raise UsageError("--huber-delta must be positive")
    X = read_matrix_csv(a.matrix)
    if a.rank > min(X.shape):
        raise UsageError(f"--rank {a.rank} exceeds min(n, p) = {min(X.shape)}")
    t0 = time.perf_counter()
    try:
        fac, pairs, objs, conv = _decompose(X, a.method, a.rank, a.seed, a.tol, a.huber_delta)
    except (ConvergenceError, DegenerateInputError, np.linalg.LinAlgError) as exc:
        raise NumericFailure(f"{a.method}: {exc}") from exc
    dt = time.perf_counter() - t0
    os.makedirs(a.out, exist_ok=True)
    write_matrix_csv(os.path.join(a.out, "d.csv"), fac.d[:, None])
    write_matrix_csv(os.path.join(a.out, "U.csv"), fac.U)
    write_matrix_csv(os.path.join(a.out, "V.csv"), fac.V)
    dump_json(result_dict(fac, a.method, a.rank, a.seed, X.shape, pairs, objs, conv),
              os.path.join(a.out, "result.json"))
    resid = f1_norm(X - fac.reconstruct())
    print(f"method={a.method} rank={a.rank} f1_residual={resid:.6g} "
          f"converged={str(conv).lower()} wall_time_s={dt:.4f}")
    return EXIT_OK


class NumericFailure(Exception):
    pass


# ---------------------------------------------------------------------------
# simulate

SIM_KEYS = {
    "n": int, "p": int, "rank": int, "singular_values": _float_list, "etas": _float_list,
    "reps": int, "methods": _name_list, "outlier_mode": str, "outlier_rows_frac": float,
    "outlier_cols_frac": float, "scale": float, "huber_delta": float, "seed": int,
}


def read_config(path):
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path} line {lineno}: expected key=value")
            k, v = (x.strip() for x in line.split("=", 1))
            k = k.replace("-", "_")
            if k not in SIM_KEYS:
                raise UsageError(f"{path} line {lineno}: unknown key {k!r}")
            try:
                out[k] = SIM_KEYS[k](v)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"{path} line {lineno}: bad value for {k}: {exc}")
    return out


def simulation_settings(a):
    """Merge preset, config file and flags into (SimConfig, etas, reps, methods, huber)."""
    base = {"fig1": FIG1, "rank9": RANK9, "custom": FIG1}[a.preset]
    opts = {"n": base.n, "p": base.p, "rank": base.R, "singular_values": base.singular_values,
            "etas": PRESET_ETAS.get(a.preset, PRESET_ETAS["fig1"]), "reps": 1,
            "methods": ("svd", "spsvd"), "outlier_mode": base.outlier_mode,
            "outlier_rows_frac": base.outlier_rows_frac,
            "outlier_cols_frac": base.outlier_cols_frac, "scale": 1.0,
            "huber_delta": HuberConfig.delta, "seed": 0}
    if a.config:
        opts.update(read_config(a.config))
    for k in SIM_KEYS:
        v = getattr(a, k, None)
        if v is not None:
            opts[k] = v
    for m in opts["methods"]:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    f = opts["scale"]
    if not f > 0:
        raise UsageError("scale must be positive")
    try:
        cfg = SimConfig(n=int(round(opts["n"] * f)), p=int(round(opts["p"] * f)), R=opts["rank"],
                        singular_values=tuple(s * f for s in opts["singular_values"]),
                        outlier_rows_frac=opts["outlier_rows_frac"],
                        outlier_cols_frac=opts["outlier_cols_frac"], seed=opts["seed"],
                        outlier_mode=opts["outlier_mode"])
        huber = HuberConfig(delta=opts["huber_delta"])
    except ParameterError as exc:
        raise UsageError(str(exc))
    etas = tuple(e * f for e in opts["etas"])
    if not etas or any(e < 0 for e in etas):
        raise UsageError("etas must be a non-empty list of values >= 0")
    if opts["reps"] < 1:
        raise UsageError("reps must be >= 1")
    return cfg, etas, opts["reps"], tuple(opts["methods"]), huber


def cmd_simulate(a):
    cfg, etas, reps, methods, huber = simulation_settings(a)
    recs = run_sweep(cfg, etas, methods, reps, huber=huber, workers=a.threads)
    write_sweep_csv(recs, a.out)
    for (m, eta), s in summarize(recs).items():
        print(f"method={m} eta={eta:g} left_deg={s['left_angle_deg']:.2f} "
              f"right_deg={s['right_angle_deg']:.2f} d1_ratio={s['d1_ratio']:.3f} reps={s['reps']}")
    failed = sum(r.failed for r in recs)
    if failed:
        print(f"{failed} of {len(recs)} runs failed (flagged in {a.out})", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


# ---------------------------------------------------------------------------
# bound


def _bound_value(res):
    return res.value if res.exhausted else res.k_max_searched + 1


def _mode_label(results):
    vals = [_bound_value(r) for r in results]
    counts = collections.Counter(vals)
    top = max(counts.values())
    mode = min(v for v, c in counts.items() if c == top)
    unexhausted = any((not r.exhausted) and _bound_value(r) == mode for r in results)
    return mode, f"{mode}↑" if unexhausted else str(mode)


def _print_result(res, verbose):
    print(f"{res.kind}={res.label()} subsets={res.subsets_evaluated}")
    if verbose:
        for k, v, complete in res.per_k_infimum:
            print(f"  {res.kind} k={k} infimum={v:.6g}{'' if complete else ' (partial)'}")


def appendix_table(scales, ranks, seeds, kmax, budget, threads, verbose=False, log=print):
    rows = []
    for R, sv in APPENDIX_ROWS:
        if R not in ranks:
            continue
        for t in scales:
            nres, pres = [], []
            for seed in range(seeds):
                cfg = SimConfig(n=60, p=30, R=R, singular_values=tuple(s * t for s in sv),
                                outlier_mode="none", seed=seed)
                X = gen_instance(cfg).X_clean
                nres.append(lower_bound_nR(X, R, k_max=kmax, budget=budget, threads=threads))
                pres.append(lower_bound_pR(X, R, k_max=kmax, budget=budget, threads=threads))
                if verbose:
                    for r in (nres[-1], pres[-1]):
                        log(f"# t={t:g} R={R} seed={seed}")
                        _print_result(r, True)
            rows.append({
                "singular_values": "(" + ",".join(f"{s:g}" for s in sv) + f")x{t:g}",
                "R": R, "n_R": _mode_label(nres)[1], "p_R": _mode_label(pres)[1],
                "seeds": seeds,
                "n_R_per_seed": " ".join(r.label() for r in nres),
                "p_R_per_seed": " ".join(r.label() for r in pres),
                "n_R_mode": _mode_label(nres)[0], "p_R_mode": _mode_label(pres)[0],
            })
    return rows


def cmd_bound(a):
    if (a.matrix is None) == (a.preset is None):
        raise UsageError("give either a matrix CSV or --preset appendix-table")
    if a.preset:
        rows = appendix_table(a.scales, {int(r) for r in a.ranks}, a.seeds, a.kmax, a.budget,
                              a.threads, a.verbose)
        print("\t".join(BOUND_HEADER))
        for r in rows:
            print("\t".join(str(r[h]) for h in BOUND_HEADER))
        if a.out:
            with open(a.out, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(BOUND_HEADER)
                for r in rows:
                    w.writerow([r[h] for h in BOUND_HEADER])
        return EXIT_OK
    if a.rank is None:
        raise UsageError("--rank is required with a matrix")
    X = read_matrix_csv(a.matrix)
    R = a.rank
    if R > min(X.shape):
        raise UsageError(f"--rank {R} exceeds min(n, p) = {min(X.shape)}")
    out = {}
    for fn, m in ((lower_bound_nR, X.shape[0]), (lower_bound_pR, X.shape[1])):
        kmax = min(a.kmax, m - R)
        if kmax < 1:
            raise UsageError(f"matrix too small for rank {R}")
        res = fn(X, R, k_max=kmax, budget=a.budget, threads=a.threads, seed=a.seed)
        _print_result(res, a.verbose)
        out[res.kind] = res.to_dict()
    if a.out:
        dump_json(out, a.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# probe and bench


def cmd_probe(a):
    X = read_matrix_csv(a.matrix)
    block = BlockSize(*a.block)
    try:
        block.check(*X.shape)
        if a.rank > min(X.shape):
            raise ParameterError(f"--rank {a.rank} exceeds min(n, p) = {min(X.shape)}")
    except ParameterError as exc:
        raise UsageError(str(exc))
    try:
        rep = breakdown_probe(a.stat, X, block, a.magnitudes, trials=a.trials, seed=a.seed,
                              R=a.rank, threshold_deg=a.threshold)
    except (ConvergenceError, np.linalg.LinAlgError) as exc:
        raise NumericFailure(f"{a.stat}: {exc}") from exc
    sys.stdout.write(dump_json(rep.to_dict(), a.out))
    return EXIT_OK


def bench_matrix(n, p, R, seed):
    # signal grows with the size so it stays above the noise edge sqrt(n) + sqrt(p)
    f = math.sqrt(n * p / (200 * 100))
    sv = tuple(f * np.linspace(80.0, 60.0, R)) if R > 1 else (80.0 * f,)
    return gen_instance(SimConfig(n=n, p=p, R=R, singular_values=sv, outlier_mode="none",
                                  seed=seed)).X_clean


def run_bench(sizes, R, methods, reps, seed):
    rows, failed = [], False
    for n, p in sizes:
        X = bench_matrix(n, p, R, seed)
        med = {}
        for m in methods:
            times, err = [], None
            for _ in range(reps):
                t0 = time.perf_counter()
                try:
                    if m == "svd":
                        truncated_svd(X, R, seed=seed)
                    elif m == "spsvd":
                        spsvd_decompose(X, R, seed=seed)
                    else:
                        elsvd_decompose(X, R, seed=seed)
                except (ConvergenceError, DegenerateInputError, np.linalg.LinAlgError) as exc:
                    err = exc
                    break
                times.append(time.perf_counter() - t0)
            med[m] = float(np.median(times)) if err is None else math.nan
            failed |= err is not None
            rows.append({"n": n, "p": p, "method": m, "rank": R, "reps": reps,
                         "median_wall_time_s": med[m], "failed": int(err is not None)})
        for r in rows[-len(methods):]:
            base = med.get("svd")
            r["ratio_to_svd"] = r["median_wall_time_s"] / base if base else math.nan
    return rows, failed


def cmd_bench(a):
    for m in a.methods:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    for n, p in a.sizes:
        if a.rank > min(n, p):
            raise UsageError(f"--rank {a.rank} exceeds size {n}:{p}")
    rows, failed = run_bench(a.sizes, a.rank, a.methods, a.reps, a.seed)
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_HEADER)
        for r in rows:
            w.writerow([r["n"], r["p"], r["method"], r["rank"], r["reps"],
                        repr(r["median_wall_time_s"]), repr(r["ratio_to_svd"]), r["failed"]])
    for r in rows:
        print(f"{r['n']}x{r['p']} {r['method']} median={r['median_wall_time_s']:.4f}s "
              f"ratio_to_svd={r['ratio_to_svd']:.1f}")
    return EXIT_NUMERIC if failed else EXIT_OK


COMMANDS = {"decompose": cmd_decompose, "simulate": cmd_simulate, "bound": cmd_bound,
            "probe": cmd_probe, "bench": cmd_bench}


def main(argv=None):
    ap = build_parser()
    a = ap.parse_args(argv)  # argparse exits with 2 on usage errors
    if a.command != "simulate" and a.seed is None:
        a.seed = 0
    try:
        return COMMANDS[a.command](a)
    except MatrixFormatError as exc:
        print(f"sphsvd {a.command}: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ParameterError) as exc:
        print(f"sphsvd {a.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EnumerationBudgetError as exc:
        print(f"sphsvd {a.command}: {exc}", file=sys.stderr)
        if exc.partial is not None:
            _print_result(exc.partial, True)
        return EXIT_BUDGET
    except (NumericFailure, ConvergenceError, DegenerateInputError) as exc:
        print(f"sphsvd {a.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"sphsvd {a.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
