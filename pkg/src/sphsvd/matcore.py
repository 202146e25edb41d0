"""Dense matrix helpers, spherical normalization, reduced-rank SVD and subspace angles.

Matrices are plain 2-D float64 ``numpy`` arrays; :func:`as_matrix` is the single
validation point (finite entries, at least one row and one column).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConvergenceError, MatrixFormatError, ParameterError

DENSE_CUTOFF = 64
DEFAULT_TOL = 1e-10


def as_matrix(X) -> np.ndarray:
    A = np.asarray(X, dtype=np.float64)
    if A.ndim != 2:
        raise ParameterError(f"expected a 2-D matrix, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ParameterError(f"matrix must have at least one row and column, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ParameterError("matrix contains NaN or Inf entries")
    return A


@dataclass(frozen=True)
class SvdTriple:
    d: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.d < 0:
            raise ParameterError(f"singular value must be nonnegative, got {self.d}")
        for name in ("u", "v"):
            nrm = np.linalg.norm(getattr(self, name))
            if abs(nrm - 1.0) > 1e-10:
                raise ParameterError(f"{name} is not a unit vector (norm {nrm})")


@dataclass(frozen=True)
class SvdFactorization:
    """Ordered rank-R factorization ``sum_r d_r u_r v_r^T``."""

    triples: tuple
    converged: Optional[bool] = None  # only meaningful for iterative baselines

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


@dataclass(frozen=True)
class Subspace:
    """A point on Gr(k, R) stored as a k x R orthonormal basis."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=np.float64)
        if B.ndim == 1:
            B = B[:, None]
        k, R = B.shape
        if not 1 <= R <= k:
            raise ParameterError(f"need 1 <= dim <= ambient_dim, got basis shape {B.shape}")
        if not np.allclose(B.T @ B, np.eye(R), atol=1e-8, rtol=0):
            raise ParameterError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", B)

    @classmethod
    def from_span(cls, M) -> "Subspace":
        M = np.asarray(M, dtype=np.float64)
        if M.ndim == 1:
            M = M[:, None]
        Q, _ = np.linalg.qr(M)
        return cls(Q)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def row_normalize(X) -> np.ndarray:
    """Scale each row to unit l2 norm; all-zero rows are passed through."""
    X = as_matrix(X)
    # divide by the row max first so tiny or huge rows do not under/overflow
    big = np.max(np.abs(X), axis=1)
    nz = big > 0
    Y = X.copy()
    Y[nz] /= big[nz, None]
    norms = np.sqrt(np.einsum("ij,ij->i", Y, Y))
    Y[nz] /= norms[nz, None]
    return Y


def col_normalize(X) -> np.ndarray:
    return row_normalize(as_matrix(X).T).T


def f1_norm(X) -> float:
    """Element-wise 1-norm, summed with ``math.fsum`` (correctly rounded)."""
    return math.fsum(np.abs(as_matrix(X)).ravel())


def _fix_signs(U, V):
    # largest-|entry| of each right vector made positive
    idx = np.argmax(np.abs(V), axis=0)
    flip = np.sign(V[idx, np.arange(V.shape[1])])
    flip[flip == 0] = 1.0
    return U * flip, V * flip


def truncated_svd(X, R: int, tol: float = DEFAULT_TOL, seed: int = 0,
                  max_iter: int = 300, oversample: int = 4,
                  dense_cutoff: int = DENSE_CUTOFF) -> SvdFactorization:
    """Leading ``R`` singular triples of ``X``, sorted by decreasing d.

    Small problems (``min(n, p) <= dense_cutoff``) go through LAPACK's
    bidiagonalization-based SVD. Larger ones use seeded block subspace
    iteration with ``R + oversample`` columns and a Rayleigh-Ritz step per
    sweep, stopping once ``||X^T X v_r - d_r^2 v_r|| <= tol * d_1^2`` for all
    ``r <= R``.
    """
    X = as_matrix(X)
    n, p = X.shape
    m = min(n, p)
    if not (isinstance(R, (int, np.integer)) and 1 <= R <= m):
        raise ParameterError(f"rank R={R} out of range [1, {m}]")
    if not tol > 0:
        raise ParameterError("tol must be positive")

    if m <= dense_cutoff or R + oversample >= m:
        U, s, Vt = np.linalg.svd(X, full_matrices=False)
        U, s, V = U[:, :R], s[:R], Vt[:R].T
    else:
        U, s, V = _subspace_iteration(X, R, tol, seed, max_iter, oversample)

    U, V = _fix_signs(U, V)
    triples = tuple(SvdTriple(float(s[r]), U[:, r].copy(), V[:, r].copy()) for r in range(R))
    return SvdFactorization(triples)


def _subspace_iteration(X, R, tol, seed, max_iter, oversample):
    n, p = X.shape
    b = min(R + oversample, min(n, p))
    rng = np.random.default_rng(seed)
    V, _ = np.linalg.qr(rng.standard_normal((p, b)))
    for it in range(1, max_iter + 1):
        Q, _ = np.linalg.qr(X @ V)
        Ub, s, Vt = np.linalg.svd(Q.T @ X, full_matrices=False)
        V = Vt.T
        XV = X @ V[:, :R]
        res = np.linalg.norm(X.T @ XV - V[:, :R] * s[:R] ** 2, axis=0)
        if np.all(res <= tol * s[0] ** 2):
            break
    else:
        raise ConvergenceError(f"subspace iteration did not reach tol={tol:g}", max_iter)
    s = s[:R]
    U = Q @ Ub[:, :R]
    pos = s > 0
    U[:, pos] = XV[:, pos] / s[pos]
    # renormalize: X v / d is unit only up to the residual tolerance
    U /= np.linalg.norm(U, axis=0)
    return U, s, V[:, :R]


def _as_basis(A) -> np.ndarray:
    if isinstance(A, Subspace):
        return A.basis
    B = np.asarray(A, dtype=np.float64)
    if B.ndim == 1:
        B = B[:, None]
    if not np.allclose(B.T @ B, np.eye(B.shape[1]), atol=1e-10, rtol=0):
        B, _ = np.linalg.qr(B)
    return B


def principal_angle(A, B) -> float:
    """Largest canonical angle (radians) between two equal-dimension subspaces.

    ``A`` and ``B`` may be :class:`Subspace` objects, basis matrices or single
    vectors. Near zero the angle is taken from the sine,
    ``||(I - A A^T) B||_2``, since ``arccos`` loses half the digits there.
    """
    Va, Vb = _as_basis(A), _as_basis(B)
    if Va.shape != Vb.shape:
        raise ParameterError(f"subspace shapes differ: {Va.shape} vs {Vb.shape}")
    M = Va.T @ Vb
    c = float(np.clip(np.linalg.svd(M, compute_uv=False).min(), 0.0, 1.0))
    if c > math.sqrt(0.5):
        s = float(np.linalg.norm(Vb - Va @ M, 2))
        return math.asin(min(s, 1.0))
    return math.acos(c)


def read_matrix_csv(path) -> np.ndarray:
    """Read a headerless CSV of reals. Rejects ragged rows and non-finite values."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise MatrixFormatError(f"non-numeric entry in {row!r}", line) from None
            if not all(math.isfinite(v) for v in vals):
                raise MatrixFormatError("non-finite value", line)
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise MatrixFormatError(f"ragged row: {len(vals)} fields, expected {width}", line)
            rows.append(vals)
    if not rows:
        raise MatrixFormatError("empty matrix file")
    return np.array(rows, dtype=np.float64)


def write_matrix_csv(path, M: Sequence) -> None:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M[:, None]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in M:
            w.writerow([repr(float(x)) for x in row])
