"""Synthetic low-rank-plus-noise data, outlier mechanisms, sweeps and the accuracy study.

Random streams: every instance is keyed by ``(cfg.seed, rep)``. The key feeds a
``SeedSequence`` whose three spawned children drive, in this order, the
factor stream (Haar U and V), the noise stream (E), and the index stream
(outlier rows/columns and the null-space mixing vectors). Each child runs on
a Philox counter-based bit generator.
"""
from __future__ import annotations

import csv
import dataclasses
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import HuberConfig, elsvd_decompose
from .errors import ParameterError
from .matcore import principal_angle, truncated_svd
from .spsvd import spsvd_decompose

OUTLIER_MODES = ("nullspace", "signal-block", "none")
SWEEP_HEADER = ("method", "eta", "left_angle_deg", "right_angle_deg", "d1_ratio",
                "wall_time_s", "seed", "rep", "failed")


@dataclass(frozen=True)
class SimConfig:
    """``outlier_mode``: "nullspace" plants a unit-Frobenius rank-1 block
    orthogonal to both signal spaces; "signal-block" copies the signal L onto
    the I x J block (the higher-rank experiment); "none" adds no outliers."""

    n: int = 200
    p: int = 100
    R: int = 3
    singular_values: tuple = (80.0, 70.0, 60.0)
    eta: float = 0.0
    outlier_rows_frac: float = 0.05
    outlier_cols_frac: float = 0.05
    seed: int = 0
    outlier_mode: str = "nullspace"

    def __post_init__(self):
        sv = tuple(float(s) for s in self.singular_values)
        object.__setattr__(self, "singular_values", sv)
        if not 1 <= self.R <= min(self.n, self.p):
            raise ParameterError(f"R={self.R} out of range for {self.n}x{self.p}")
        if len(sv) != self.R:
            raise ParameterError(f"need {self.R} singular values, got {len(sv)}")
        if any(s <= 0 for s in sv) or any(a <= b for a, b in zip(sv, sv[1:])):
            raise ParameterError("singular values must be positive and strictly decreasing")
        if self.eta < 0:
            raise ParameterError("eta must be >= 0")
        if self.outlier_mode not in OUTLIER_MODES:
            raise ParameterError(f"outlier_mode must be one of {OUTLIER_MODES}")
        if self.outlier_mode != "none":
            for f in (self.outlier_rows_frac, self.outlier_cols_frac):
                if not 0 < f < 1:
                    raise ParameterError("outlier fractions must lie in (0, 1)")
            ni, nj = self.outlier_counts()
            if self.outlier_mode == "nullspace" and (ni <= self.R or nj <= self.R):
                raise ParameterError(
                    f"null-space outliers need more than R={self.R} rows and columns, got {ni}x{nj}")

    def outlier_counts(self):
        return (max(1, round(self.outlier_rows_frac * self.n)),
                max(1, round(self.outlier_cols_frac * self.p)))

    def replace(self, **kw) -> "SimConfig":
        return dataclasses.replace(self, **kw)


FIG1 = SimConfig()
RANK9 = SimConfig(n=1000, p=500, R=9, singular_values=tuple(range(750, 349, -50)), eta=1000.0,
                  outlier_mode="signal-block")


def scaled(cfg: SimConfig, factor: float) -> SimConfig:
    """Shrink or grow n, p, the singular values and eta together."""
    return cfg.replace(n=int(round(cfg.n * factor)), p=int(round(cfg.p * factor)),
                       singular_values=tuple(s * factor for s in cfg.singular_values),
                       eta=cfg.eta * factor)


def streams(seed: int, rep: int = 0):
    ss = np.random.SeedSequence(seed, spawn_key=(rep,))
    fac, noise, idx = ss.spawn(3)
    mk = lambda s: np.random.Generator(np.random.Philox(s))  # noqa: E731
    return mk(fac), mk(noise), mk(idx)


def _haar(rng, k, R):
    Q, Rm = np.linalg.qr(rng.standard_normal((k, R)))
    # sign fix makes QR of a Gaussian matrix exactly Haar distributed
    s = np.sign(np.diag(Rm))
    s[s == 0] = 1.0
    return Q * s


def haar_orthogonal_factors(n: int, p: int, R: int, seed=0):
    """Haar-distributed n x R and p x R orthonormal factors.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if not 1 <= R <= min(n, p):
        raise ParameterError(f"R={R} out of range for {n}x{p}")
    rng = seed if isinstance(seed, np.random.Generator) else streams(seed)[0]
    U = _haar(rng, n, R)
    V = _haar(rng, p, R)
    return U, V


@dataclass(frozen=True)
class GeneratedInstance:
    X_clean: np.ndarray
    X_contaminated: np.ndarray
    U_true: np.ndarray
    V_true: np.ndarray
    d_true: np.ndarray
    S: np.ndarray
    I: np.ndarray
    J: np.ndarray
    cfg: SimConfig

    @property
    def L(self):
        return (self.U_true * self.d_true) @ self.V_true.T


def _null_vector(rng, B):
    """Random unit vector a with B^T a = 0 (B is k x R, k > R)."""
    Ufull = np.linalg.svd(B, full_matrices=True)[0]
    N = Ufull[:, B.shape[1]:]
    a = N @ rng.standard_normal(N.shape[1])
    return a / np.linalg.norm(a)


def gen_instance(cfg: SimConfig, rep: int = 0) -> GeneratedInstance:
    f_rng, e_rng, i_rng = streams(cfg.seed, rep)
    n, p, R = cfg.n, cfg.p, cfg.R
    U, V = haar_orthogonal_factors(n, p, R, f_rng)
    d = np.array(cfg.singular_values)
    L = (U * d) @ V.T
    E = e_rng.standard_normal((n, p))
    X = L + E
    S = np.zeros((n, p))
    if cfg.outlier_mode == "none":
        I = J = np.array([], dtype=np.intp)
    else:
        ni, nj = cfg.outlier_counts()
        I = np.sort(i_rng.choice(n, ni, replace=False))
        J = np.sort(i_rng.choice(p, nj, replace=False))
        if cfg.outlier_mode == "nullspace":
            a = np.zeros(n)
            b = np.zeros(p)
            a[I] = _null_vector(i_rng, U[I])
            b[J] = _null_vector(i_rng, V[J])
            S = np.outer(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
        else:
            S[np.ix_(I, J)] = L[np.ix_(I, J)]
    Xc = X.copy() if cfg.eta == 0 else X + cfg.eta * S
    return GeneratedInstance(X, Xc, U, V, d, S, I, J, cfg)


def contaminate_scale_block(X, I, J, factor: float) -> np.ndarray:
    """Multiply the entries in rows I x columns J by ``factor``."""
    X = np.array(X, dtype=np.float64, copy=True)
    n, p = X.shape
    I = np.asarray(I, dtype=np.intp).ravel()
    J = np.asarray(J, dtype=np.intp).ravel()
    if I.size and (I.min() < 0 or I.max() >= n):
        raise ParameterError(f"row index out of range [0, {n})")
    if J.size and (J.min() < 0 or J.max() >= p):
        raise ParameterError(f"column index out of range [0, {p})")
    X[np.ix_(I, J)] *= factor
    return X


# ---------------------------------------------------------------------------
# sweeps


def _run_method(method, X, R, huber):
    if method == "svd":
        return truncated_svd(X, R)
    if method == "spsvd":
        return spsvd_decompose(X, R)
    if method == "elsvd":
        return elsvd_decompose(X, R, huber)
    raise ParameterError(f"unknown method {method!r}")


METHODS = ("svd", "spsvd", "elsvd")


@dataclass
class ExperimentRecord:
    method: str
    eta: float
    left_angle_deg: float
    right_angle_deg: float
    d1_ratio: float
    wall_time_s: float
    seed: int
    rep: int
    failed: bool = False
    error: str = field(default="", compare=False)

    def row(self):
        fmt = lambda x: repr(float(x))  # noqa: E731
        return [self.method, fmt(self.eta), fmt(self.left_angle_deg), fmt(self.right_angle_deg),
                fmt(self.d1_ratio), fmt(self.wall_time_s), str(self.seed), str(self.rep),
                "1" if self.failed else "0"]


def evaluate(method, inst: GeneratedInstance, rep: int = 0, huber=HuberConfig()) -> ExperimentRecord:
    cfg = inst.cfg
    try:
        t0 = time.perf_counter()
        fac = _run_method(method, inst.X_contaminated, cfg.R, huber)
        dt = time.perf_counter() - t0
        return ExperimentRecord(
            method, cfg.eta,
            math.degrees(principal_angle(fac.U, inst.U_true)),
            math.degrees(principal_angle(fac.V, inst.V_true)),
            float(fac.d[0] / inst.d_true[0]), max(dt, 1e-9), cfg.seed, rep)
    except ParameterError:
        raise
    except Exception as exc:  # recorded, the sweep goes on
        nan = float("nan")
        return ExperimentRecord(method, cfg.eta, nan, nan, nan, nan, cfg.seed, rep,
                                failed=True, error=f"{type(exc).__name__}: {exc}")


def run_sweep(cfg_base: SimConfig, etas, methods=("svd", "spsvd"), reps: int = 1,
              huber: HuberConfig = HuberConfig(), workers: int = 1):
    """Records ordered by (eta, method, rep). The instance for a given rep is
    the same across methods and eta values (common random numbers)."""
    for m in methods:
        if m not in METHODS:
            raise ParameterError(f"unknown method {m!r}; choose from {METHODS}")
    if reps < 1:
        raise ParameterError("reps must be >= 1")
    cells = [(float(eta), rep) for eta in etas for rep in range(reps)]

    def run_cell(cell):
        eta, rep = cell
        inst = gen_instance(cfg_base.replace(eta=eta), rep)
        return {m: evaluate(m, inst, rep, huber) for m in methods}

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(run_cell, cells))
    else:
        results = [run_cell(c) for c in cells]
    by_cell = dict(zip(cells, results))
    return [by_cell[(float(eta), rep)][m]
            for eta in etas for m in methods for rep in range(reps)]


def write_sweep_csv(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in records:
            w.writerow(r.row())


def summarize(records):
    """Mean metrics per (method, eta) over non-failed reps."""
    out = {}
    for r in records:
        if r.failed:
            continue
        out.setdefault((r.method, r.eta), []).append(r)
    summary = {}
    for key, rs in out.items():
        summary[key] = {
            "left_angle_deg": float(np.mean([r.left_angle_deg for r in rs])),
            "right_angle_deg": float(np.mean([r.right_angle_deg for r in rs])),
            "d1_ratio": float(np.mean([r.d1_ratio for r in rs])),
            "median_wall_time_s": float(np.median([r.wall_time_s for r in rs])),
            "reps": len(rs),
        }
    return summary


# ---------------------------------------------------------------------------
# accuracy under a small fraction of gross outliers


def default_eigenvalues(p: int):
    return tuple(2.0 ** -j for j in range(p))


def accuracy_study(n_list, p: int, epsilon_list, seed: int = 0, reps: int = 50,
                   eigenvalues=None, outlier_scale: float = 1e6, R: int = 1):
    """Mean eigenvector error of SpSVD with an eps fraction of gross outliers.

    Clean rows are N(0, diag(eigenvalues)), so the target vectors are the
    standard basis. All eps*n outliers equal ``outlier_scale * w`` with
    w = (e_1 + e_2)/sqrt(2), which tilts the leading direction. The error for
    direction j is min(||v - e_j||, ||v + e_j||), where v is the SpSVD right
    vector drawn from the j-th candidate. Returns rows
    ``{"n", "epsilon", "j", "mean_error", "reps"}``.
    """
    lam = np.array(default_eigenvalues(p) if eigenvalues is None else eigenvalues, dtype=float)
    if lam.shape != (p,) or np.any(lam <= 0):
        raise ParameterError("need p positive eigenvalues")
    if np.unique(lam).size != p:
        raise ParameterError("eigenvalues must be distinct (eigen-gap > 0 for every direction)")
    if reps < 1:
        raise ParameterError("reps must be >= 1")
    w = np.zeros(p)
    w[:2] = 1.0 / math.sqrt(2.0)
    sd = np.sqrt(lam)
    rows = []
    for n in n_list:
        for eps in epsilon_list:
            n_out = eps * n
            if abs(n_out - round(n_out)) > 1e-9:
                raise ParameterError(f"epsilon*n must be an integer (eps={eps}, n={n})")
            n_out = int(round(n_out))
            errs = np.zeros((reps, R))
            for rep in range(reps):
                rng = np.random.Generator(np.random.Philox(
                    np.random.SeedSequence(seed, spawn_key=(int(n), int(round(eps * 1e6)), rep))))
                Xc = rng.standard_normal((n - n_out, p)) * sd
                X = np.vstack([Xc, np.tile(outlier_scale * w, (n_out, 1))])
                res = spsvd_decompose(X, R)
                for (_, b), t in zip(res.pair_indices, res.triples):
                    e = np.zeros(p)
                    e[b] = 1.0
                    errs[rep, b] = min(np.linalg.norm(t.v - e), np.linalg.norm(t.v + e))
            for j in range(R):
                rows.append({"n": int(n), "epsilon": float(eps), "j": j + 1,
                             "mean_error": float(errs[:, j].mean()), "reps": reps})
    return rows
