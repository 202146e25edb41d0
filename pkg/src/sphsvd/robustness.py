"""Breakdown-point tools for singular-subspace statistics.

* ``block_cmp`` is the product order on contamination block sizes (k, l).
* ``lower_bound_nR`` / ``lower_bound_pR`` enumerate row deletions of the
  row-normalized matrix to find the smallest k with
  ``k >= inf_S [lambda_R(Xs)^2 - lambda_1(Xs Pi)^2]``, where ``Xs`` drops the
  rows in S (|S| = k) and ``Pi`` projects onto the orthogonal complement of
  the SpSVD right subspace. This k lower-bounds the row-wise breakdown point
  of that subspace.
* ``breakdown_probe`` is a randomized *lower* estimate of the supremum angle
  over block contaminations. It plants rank-1 spikes shaped like the
  constructions used to prove breakdown (spikes orthogonal to the clean
  subspace, constant-column spikes) at growing magnitudes. It can certify
  breakdown but never rule it out.
"""
from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .baselines import HuberConfig, elsvd_decompose
from .errors import EnumerationBudgetError, ParameterError
from .matcore import as_matrix, principal_angle, row_normalize, truncated_svd
from .spsvd import extract_candidates, spsvd_decompose

DEFAULT_KMAX = 6
DEFAULT_BUDGET = 5_000_000
DEFAULT_THRESHOLD_DEG = 89.0


class BlockOrder(enum.Enum):
    LESS = "less"
    GREATER = "greater"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True, order=False)
class BlockSize:
    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ParameterError(f"block size must be >= (1, 1), got ({self.rows}, {self.cols})")

    def check(self, n, p):
        if self.rows > n or self.cols > p:
            raise ParameterError(f"block ({self.rows}, {self.cols}) exceeds matrix shape ({n}, {p})")
        return self

    def __le__(self, other):
        return self.rows <= other.rows and self.cols <= other.cols


def block_cmp(a: BlockSize, b: BlockSize) -> BlockOrder:
    if a == b:
        return BlockOrder.EQUAL
    if a <= b:
        return BlockOrder.LESS
    if b <= a:
        return BlockOrder.GREATER
    return BlockOrder.INCOMPARABLE


# ---------------------------------------------------------------------------
# lower bounds by row-deletion enumeration


@dataclass
class BoundResult:
    kind: str                 # "n_R" or "p_R"
    R: int
    value: int | None         # None when no k <= k_max satisfied the inequality
    k_max_searched: int
    exhausted: bool
    per_k_infimum: list = field(default_factory=list)  # (k, value, complete)
    subsets_evaluated: int = 0

    def label(self) -> str:
        return str(self.value) if self.exhausted else f"{self.k_max_searched + 1}↑"

    def to_dict(self):
        return {
            "kind": self.kind,
            "R": self.R,
            "value": self.value,
            "label": self.label(),
            "k_max_searched": self.k_max_searched,
            "exhausted": self.exhausted,
            "per_k_infimum": [
                {"k": k, "infimum": v, "complete": c} for k, v, c in self.per_k_infimum
            ],
            "subsets_evaluated": self.subsets_evaluated,
        }


def complement_basis(V) -> np.ndarray:
    """Orthonormal basis (p x (p-R)) of the orthogonal complement of span(V)."""
    V = np.asarray(V, dtype=np.float64)
    p, R = V.shape
    Q, _ = np.linalg.qr(V, mode="complete")
    return Q[:, R:]


def deletion_gap(Xs, Pi_basis, R: int) -> float:
    """``lambda_R(Xs)^2 - lambda_1(Xs Pi)^2`` for one row-subset matrix.

    ``Pi_basis`` is any orthonormal basis of the projection's range.
    """
    Xs = np.asarray(Xs, dtype=np.float64)
    s = np.linalg.svd(Xs, compute_uv=False)
    lam_R = s[R - 1] if s.size >= R else 0.0
    if Pi_basis.shape[1] == 0:
        mu = 0.0
    else:
        mu = np.linalg.svd(Xs @ Pi_basis, compute_uv=False)[0]
    return float(lam_R ** 2 - mu ** 2)


class _SubsetEvaluator:
    """Batched deletion_gap over many row subsets of one normalized matrix."""

    def __init__(self, Xt, Qp, R):
        n, p = Xt.shape
        self.R = R
        self.n = n
        self.Xt = Xt
        Y = Xt @ Qp
        self.q = Y.shape[1]
        # Removing rows subtracts their outer products from the column Gram;
        # for short matrices the row Gram submatrix is cheaper.
        self.Gx = Xt.T @ Xt
        self.Gy = Y.T @ Y
        self.Ox = np.einsum("ij,ik->ijk", Xt, Xt)
        self.Oy = np.einsum("ij,ik->ijk", Y, Y)
        self.Kx = Xt @ Xt.T
        self.Ky = Y @ Y.T
        self.p = p

    def values(self, idx):
        b, k = idx.shape
        m = self.n - k
        if m < self.p:
            keep = _complement_rows(idx, self.n)
            Kx = self.Kx[keep[:, :, None], keep[:, None, :]]
            lam = np.linalg.eigvalsh(Kx)[:, m - self.R]
            if self.q == 0:
                mu = np.zeros(b)
            else:
                Ky = self.Ky[keep[:, :, None], keep[:, None, :]]
                mu = np.linalg.eigvalsh(Ky)[:, -1]
        else:
            G = np.broadcast_to(self.Gx, (b,) + self.Gx.shape).copy()
            H = np.broadcast_to(self.Gy, (b,) + self.Gy.shape).copy()
            for j in range(k):
                G -= self.Ox[idx[:, j]]
                H -= self.Oy[idx[:, j]]
            lam = np.linalg.eigvalsh(G)[:, self.p - self.R]
            mu = np.linalg.eigvalsh(H)[:, -1] if self.q else np.zeros(b)
        return np.maximum(lam, 0.0) - np.maximum(mu, 0.0)


def _complement_rows(idx, n):
    b, k = idx.shape
    mask = np.ones((b, n), dtype=bool)
    mask[np.arange(b)[:, None], idx] = False
    return np.nonzero(mask)[1].reshape(b, n - k)


def _combination_chunks(n, k, chunk):
    it = itertools.combinations(range(n), k)
    while True:
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, chunk)),
                           dtype=np.intp)
        if flat.size == 0:
            return
        yield flat.reshape(-1, k)


def lower_bound_nR(X, R: int, k_max: int = DEFAULT_KMAX, budget: int = DEFAULT_BUDGET,
                   short_circuit: bool = True, threads: int = 1, chunk: int = 4096,
                   seed: int = 0, _kind: str = "n_R") -> BoundResult:
    """Row-deletion lower bound for the SpSVD right subspace.

    With ``short_circuit`` the scan of a given k stops as soon as one subset
    satisfies the inequality; that k's recorded value is then only an upper
    bound on the infimum (``complete=False``). Earlier k are always scanned
    in full. Raises :class:`EnumerationBudgetError` once more than ``budget``
    subsets would be evaluated.
    """
    X = as_matrix(X)
    n, p = X.shape
    if not 1 <= R <= min(n, p):
        raise ParameterError(f"rank R={R} out of range [1, {min(n, p)}]")
    if k_max < 1:
        raise ParameterError("k_max must be >= 1")
    if k_max > n - R:
        raise ParameterError(f"k_max={k_max} leaves fewer than R={R} rows (n={n})")
    Xt = row_normalize(X)
    V = extract_candidates(X, R, seed=seed).V
    ev = _SubsetEvaluator(Xt, complement_basis(V), R)

    result = BoundResult(_kind, R, None, k_max, False)
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for k in range(1, k_max + 1):
            best = math.inf
            hit = False
            chunks = _combination_chunks(n, k, chunk)
            while not hit:
                group = list(itertools.islice(chunks, max(threads, 1)))
                if not group:
                    break
                size = sum(len(g) for g in group)
                if result.subsets_evaluated + size > budget:
                    result.per_k_infimum.append((k, best, False))
                    result.k_max_searched = k - 1
                    raise EnumerationBudgetError(
                        f"{_kind}: submatrix budget {budget} exceeded at k={k}", partial=result)
                vals = list(pool.map(ev.values, group)) if pool else [ev.values(g) for g in group]
                result.subsets_evaluated += size
                for v in vals:  # in chunk order, so the reduction is thread-count independent
                    best = min(best, float(v.min()))
                if short_circuit and best <= k:
                    hit = True
            result.per_k_infimum.append((k, best, not (hit and short_circuit)))
            if best <= k:
                result.value = k
                result.exhausted = True
                result.k_max_searched = k
                return result
    finally:
        if pool:
            pool.shutdown()
    return result


def lower_bound_pR(X, R: int, k_max: int = DEFAULT_KMAX, budget: int = DEFAULT_BUDGET,
                   short_circuit: bool = True, threads: int = 1, chunk: int = 4096,
                   seed: int = 0) -> BoundResult:
    """Column counterpart: the n_R computation on the transpose.

    The right SpSVD subspace of X^T is the left SpSVD subspace of X.
    """
    return lower_bound_nR(as_matrix(X).T, R, k_max=k_max, budget=budget,
                          short_circuit=short_circuit, threads=threads, chunk=chunk,
                          seed=seed, _kind="p_R")


# ---------------------------------------------------------------------------
# breakdown probes


def _svd_stat(side):
    def f(Z, R):
        fac = truncated_svd(Z, R)
        return fac.V if side == "right" else fac.U
    return f


def _spsvd_stat(side):
    def f(Z, R):
        res = spsvd_decompose(Z, R)
        return res.V if side == "right" else res.U
    return f


def _elsvd_stat(side):
    def f(Z, R):
        fac = elsvd_decompose(Z, R, HuberConfig())
        return fac.V if side == "right" else fac.U
    return f


STATS: dict[str, Callable] = {
    "svd-right": _svd_stat("right"),
    "svd-left": _svd_stat("left"),
    "spsvd-right": _spsvd_stat("right"),
    "spsvd-left": _spsvd_stat("left"),
    "elsvd-right": _elsvd_stat("right"),
    "elsvd-left": _elsvd_stat("left"),
}

PATTERNS = ("orthogonal", "constant-column", "random")


@dataclass
class ProbeReport:
    stat: str
    block: BlockSize
    max_angle: float          # radians
    magnitude_at_max: float
    trials: int
    broke_down: bool
    threshold_deg: float
    pattern_at_max: str = ""

    @property
    def max_angle_deg(self) -> float:
        return math.degrees(self.max_angle)

    def to_dict(self):
        return {
            "stat": self.stat,
            "block": [self.block.rows, self.block.cols],
            "max_angle_rad": self.max_angle,
            "max_angle_deg": self.max_angle_deg,
            "magnitude_at_max": self.magnitude_at_max,
            "pattern_at_max": self.pattern_at_max,
            "trials": self.trials,
            "broke_down": self.broke_down,
            "threshold_deg": self.threshold_deg,
        }


def _unit_orthogonal(rng, basis_rows):
    """Random unit vector orthogonal to the columns of ``basis_rows`` if room, else random."""
    k, R = basis_rows.shape
    x = rng.standard_normal(k)
    if k > R:
        Q, _ = np.linalg.qr(basis_rows)
        x = x - Q @ (Q.T @ x)
    nrm = np.linalg.norm(x)
    return x / nrm if nrm > 1e-12 else np.full(k, 1.0 / math.sqrt(k))


def _spike(pattern, rng, Uref_rows, Vref_cols):
    k, l = Uref_rows.shape[0], Vref_cols.shape[0]
    if pattern == "orthogonal":
        a = _unit_orthogonal(rng, Uref_rows)
        b = _unit_orthogonal(rng, Vref_cols)
    elif pattern == "constant-column":
        a = np.full(k, 1.0 / math.sqrt(k))
        b = _unit_orthogonal(rng, Vref_cols)
    else:
        a = rng.standard_normal(k)
        b = rng.standard_normal(l)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
    return np.outer(a, b)


def breakdown_probe(stat: str, X, block: BlockSize, magnitudes, trials: int = 5, seed: int = 0,
                    R: int = 1, threshold_deg: float = DEFAULT_THRESHOLD_DEG,
                    subblocks: bool = True, patterns=PATTERNS) -> ProbeReport:
    """Largest angle ``stat`` moves under planted block contamination.

    Each trial draws one row and one column permutation. A (k', l') block uses
    their first k' rows and l' columns, so with ``subblocks=True`` every size
    below ``block`` is tried too, and the estimate is monotone along chains of
    block sizes for a fixed seed.
    """
    if stat not in STATS:
        raise ParameterError(f"unknown stat {stat!r}; valid handles: {', '.join(STATS)}")
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    magnitudes = [float(c) for c in magnitudes]
    if not magnitudes:
        raise ParameterError("need at least one magnitude")
    X = as_matrix(X)
    n, p = X.shape
    block.check(n, p)
    f = STATS[stat]
    ref = f(X, R)
    clean = truncated_svd(X, R)
    if stat.endswith("left"):
        Uref, Vref = ref, clean.V
    else:
        Uref, Vref = clean.U, ref

    sizes = ([(i, j) for i in range(1, block.rows + 1) for j in range(1, block.cols + 1)]
             if subblocks else [(block.rows, block.cols)])
    best = (-1.0, magnitudes[0], "")
    for t in range(trials):
        trng = np.random.default_rng(np.random.SeedSequence([seed, t]))
        rperm = trng.permutation(n)
        cperm = trng.permutation(p)
        for (k, l) in sizes:
            rows, cols = rperm[:k], cperm[:l]
            prng = np.random.default_rng(np.random.SeedSequence([seed, t, k, l]))
            for pat in patterns:
                P = _spike(pat, prng, Uref[rows], Vref[cols])
                for c in magnitudes:
                    Z = X.copy()
                    Z[np.ix_(rows, cols)] = c * P
                    ang = principal_angle(f(Z, R), ref)
                    if ang > best[0]:
                        best = (ang, c, pat)
    ang = min(max(best[0], 0.0), math.pi / 2)
    return ProbeReport(stat, block, ang, best[1], trials,
                       math.degrees(ang) >= threshold_deg, threshold_deg, best[2])
