"""Comparators: plain truncated SVD and element-wise Huber-loss SVD (ELSVD).

ELSVD fits each rank-1 term to the deflated residual by alternating
iteratively-reweighted least squares, warm-started from the residual's top
singular triple. Each half-step (update the left factor with the right one
fixed, then the reverse) minimizes the standard quadratic majorizer of the
Huber loss, so the objective never increases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, ParameterError
from .matcore import (DEFAULT_TOL, SvdFactorization, SvdTriple, as_matrix,
                      truncated_svd)


def svd_decompose(X, R: int, tol: float = DEFAULT_TOL, seed: int = 0) -> SvdFactorization:
    return truncated_svd(X, R, tol=tol, seed=seed)


@dataclass(frozen=True)
class HuberConfig:
    delta: float = 1.345
    max_iters: int = 200
    conv_tol: float = 1e-8

    def __post_init__(self):
        if not self.delta > 0:
            raise ParameterError("delta must be positive")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")
        if not self.conv_tol > 0:
            raise ParameterError("conv_tol must be positive")


def huber_loss(Z, delta: float) -> float:
    a = np.abs(Z)
    if math.isinf(delta):
        return float(0.5 * np.sum(a * a))
    quad = a <= delta
    return float(np.sum(np.where(quad, 0.5 * a * a, delta * (a - 0.5 * delta))))


def _huber_weights(Z, delta):
    if math.isinf(delta):
        return np.ones_like(Z)
    a = np.abs(Z)
    w = np.ones_like(Z)
    big = a > delta
    w[big] = delta / a[big]
    return w


@dataclass
class ElsvdTrace:
    """Per-component Huber objective after every half-step, and convergence flags."""

    objectives: list = field(default_factory=list)
    converged: list = field(default_factory=list)
    iterations: list = field(default_factory=list)


def _rank1_huber(Xr, a, b, cfg, history):
    delta = cfg.delta
    obj = huber_loss(Xr - np.outer(a, b), delta)
    history.append(obj)
    for it in range(1, cfg.max_iters + 1):
        W = _huber_weights(Xr - np.outer(a, b), delta)
        den = W @ (b * b)
        a = np.where(den > 0, (W * Xr) @ b / np.where(den > 0, den, 1.0), 0.0)
        W = _huber_weights(Xr - np.outer(a, b), delta)
        history.append(huber_loss(Xr - np.outer(a, b), delta))
        den = (a * a) @ W
        b = np.where(den > 0, a @ (W * Xr) / np.where(den > 0, den, 1.0), 0.0)
        new = huber_loss(Xr - np.outer(a, b), delta)
        history.append(new)
        if abs(obj - new) <= cfg.conv_tol * max(abs(obj), 1e-300):
            return a, b, True, it
        obj = new
    return a, b, False, cfg.max_iters


def _scale_huber(Xr, u, v, d0, cfg):
    # 1-D IRLS for the scale with u, v fixed
    P = np.outer(u, v)
    d = d0
    for _ in range(cfg.max_iters):
        W = _huber_weights(Xr - d * P, cfg.delta)
        den = float(np.sum(W * P * P))
        if den <= 0:
            break
        new = float(np.sum(W * P * Xr)) / den
        if abs(new - d) <= cfg.conv_tol * max(abs(d), 1e-300):
            d = new
            break
        d = new
    return d


def _warm_start(Xr, seed):
    try:
        return truncated_svd(Xr, 1, tol=1e-8, seed=seed).triples[0]
    except ConvergenceError:
        # only a starting point; the dense path always succeeds
        return truncated_svd(Xr, 1, dense_cutoff=min(Xr.shape)).triples[0]


def _orthogonalize(x, basis):
    for q in basis:
        x = x - (q @ x) * q
    nrm = np.linalg.norm(x)
    return x / nrm if nrm > 1e-12 else np.zeros_like(x)


def elsvd_decompose(X, R: int, cfg: HuberConfig = HuberConfig(), seed: int = 0,
                    trace: ElsvdTrace | None = None) -> SvdFactorization:
    """Huber-loss SVD by deflation. Non-convergence is reported, not raised.

    After each component converges its u and v are Gram-Schmidt projected
    against the earlier ones and the scale refit, which enforces the
    orthogonality constraint.
    """
    X = as_matrix(X)
    m = min(X.shape)
    if not (isinstance(R, (int, np.integer)) and 1 <= R <= m):
        raise ParameterError(f"rank R={R} out of range [1, {m}]")
    trace = trace if trace is not None else ElsvdTrace()
    Xr = X.copy()
    triples, us, vs = [], [], []
    for _ in range(R):
        top = _warm_start(Xr, seed)
        a0, b0 = top.d * top.u, top.v.copy()
        hist = []
        a, b, ok, its = _rank1_huber(Xr, a0, b0, cfg, hist)
        trace.objectives.append(hist)
        trace.converged.append(ok)
        trace.iterations.append(its)
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na == 0 or nb == 0:
            u, v, d = top.u, top.v, 0.0
        else:
            u, v, d = a / na, b / nb, na * nb
        u = _orthogonalize(u, us)
        v = _orthogonalize(v, vs)
        if np.linalg.norm(u) == 0 or np.linalg.norm(v) == 0:
            u, v, d = _fallback_direction(X.shape[0], us), _fallback_direction(X.shape[1], vs), 0.0
        else:
            d = _scale_huber(Xr, u, v, d, cfg)
        if d < 0:
            d, u = -d, -u
        Xr = Xr - d * np.outer(u, v)
        us.append(u)
        vs.append(v)
        triples.append(SvdTriple(float(d), u, v))
    return SvdFactorization(tuple(triples), converged=all(trace.converged[-R:]))


def _fallback_direction(k, basis):
    for i in range(k):
        e = np.zeros(k)
        e[i] = 1.0
        x = _orthogonalize(e, basis)
        if np.linalg.norm(x) > 0.5:
            return x
    raise ParameterError("no direction left orthogonal to previous components")
