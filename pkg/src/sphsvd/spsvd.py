"""Spherically normalized SVD.

Candidate right vectors come from the row-normalized matrix, candidate left
vectors from the column-normalized one. Triples are then picked greedily: at
step r every remaining (u, v) pair gets its best scale under the element-wise
1-norm (a weighted median), the pair with the smallest residual wins, its
rank-1 term is deflated, and both candidates leave the pool.

Note the candidate pool depends on R, so the first r' triples of
``spsvd_decompose(X, R)`` need not equal ``spsvd_decompose(X, r')``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .matcore import (DEFAULT_TOL, SvdFactorization, SvdTriple, as_matrix,
                      col_normalize, f1_norm, row_normalize, truncated_svd)
from .wmedian import _select

ZERO_WEIGHT = 1e-14
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class CandidateSets:
    U: np.ndarray  # n x R, left candidates as columns
    V: np.ndarray  # p x R

    @property
    def R(self) -> int:
        return self.U.shape[1]


@dataclass(frozen=True)
class SpsvdResult:
    triples: tuple
    pair_indices: tuple      # (left candidate index, right candidate index) per step
    objective_values: tuple  # ||X_r - d u v^T||_F1 after each step
    candidates: CandidateSets

    @property
    def rank(self) -> int:
        return len(self.triples)

    @property
    def d(self) -> np.ndarray:
        return np.array([t.d for t in self.triples])

    @property
    def U(self) -> np.ndarray:
        return np.column_stack([t.u for t in self.triples])

    @property
    def V(self) -> np.ndarray:
        return np.column_stack([t.v for t in self.triples])

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.d) @ self.V.T

    def as_factorization(self) -> SvdFactorization:
        return SvdFactorization(self.triples)


def _check_rank(X, R):
    m = min(X.shape)
    if not (isinstance(R, (int, np.integer)) and 1 <= R <= m):
        raise ParameterError(f"rank R={R} out of range [1, {m}]")


def extract_candidates(X, R: int, tol: float = DEFAULT_TOL, seed: int = 0) -> CandidateSets:
    X = as_matrix(X)
    _check_rank(X, R)
    V = truncated_svd(row_normalize(X), R, tol=tol, seed=seed).V
    U = truncated_svd(col_normalize(X), R, tol=tol, seed=seed).U
    return CandidateSets(U, V)


def fit_scale(X, u, v):
    """Best d for ||X - d u v^T||_F1 and the resulting objective.

    Entries with |u_i v_j| below ``ZERO_WEIGHT`` carry no information about d
    and are left out of the weighted median, but still count in the objective.
    """
    W = np.outer(u, v)
    aW = np.abs(W)
    mask = aW >= ZERO_WEIGHT
    if mask.all():
        d = _select((X / W).ravel(), aW.ravel(), 0.5 * aW.sum())
    elif mask.any():
        w = aW[mask]
        d = _select(X[mask] / W[mask], w, 0.5 * w.sum())
    else:
        d = 0.0
    obj = float(np.abs(X - d * W).sum())
    return d, obj


def select_pair(X_r, U_avail, V_avail):
    """Exhaustive search over candidate pairs for the step objective.

    ``U_avail``/``V_avail`` are matrices with candidates as columns (or
    sequences of vectors). Returns ``(d, u_index, v_index, objective)``; ``d``
    may be negative. Pairs are scanned in lexicographic order and a later pair
    only wins if it beats the incumbent by more than ``TIE_RTOL`` (relative).
    """
    X_r = np.asarray(X_r, dtype=np.float64)
    U_avail = _as_columns(U_avail)
    V_avail = _as_columns(V_avail)
    if U_avail.shape[1] == 0 or V_avail.shape[1] == 0:
        raise ParameterError("empty candidate list")
    best = None
    for a in range(U_avail.shape[1]):
        for b in range(V_avail.shape[1]):
            d, obj = fit_scale(X_r, U_avail[:, a], V_avail[:, b])
            if best is None or obj < best[3] - TIE_RTOL * max(1.0, abs(best[3])):
                best = (d, a, b, obj)
    return best


def _as_columns(C):
    if isinstance(C, np.ndarray) and C.ndim == 2:
        return C
    C = list(C)
    if not C:
        return np.empty((0, 0))
    return np.column_stack(C)


def spsvd_decompose(X, R: int, tol: float = DEFAULT_TOL, seed: int = 0) -> SpsvdResult:
    X = as_matrix(X)
    _check_rank(X, R)
    cands = extract_candidates(X, R, tol=tol, seed=seed)
    left = list(range(R))
    right = list(range(R))
    Xr = X.copy()
    triples, pairs, objs = [], [], []
    for _ in range(R):
        d, ia, ib, _ = select_pair(Xr, cands.U[:, left], cands.V[:, right])
        a, b = left.pop(ia), right.pop(ib)
        u, v = cands.U[:, a].copy(), cands.V[:, b].copy()
        if d < 0:
            d, u = -d, -u
        Xr = Xr - d * np.outer(u, v)
        triples.append(SvdTriple(float(d), u, v))
        pairs.append((a, b))
        objs.append(f1_norm(Xr))
    return SpsvdResult(tuple(triples), tuple(pairs), tuple(objs), cands)


def spsvd_low_rank(X, R: int, tol: float = DEFAULT_TOL, seed: int = 0) -> np.ndarray:
    return spsvd_decompose(X, R, tol=tol, seed=seed).reconstruct()
