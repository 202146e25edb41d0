import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp
from scipy.linalg import subspace_angles

from sphsvd.errors import ConvergenceError, MatrixFormatError, ParameterError
from sphsvd.matcore import (Subspace, SvdTriple, as_matrix, col_normalize, f1_norm,
                            principal_angle, read_matrix_csv, row_normalize, truncated_svd,
                            write_matrix_csv)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
matrices = hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2, min_side=1,
                                                    max_side=8), elements=finite)


def random_orthonormal(rng, k, R):
    Q, _ = np.linalg.qr(rng.standard_normal((k, R)))
    return Q


# --- validation and normalization -----------------------------------------

def test_as_matrix_rejects_bad_input():
    with pytest.raises(ParameterError):
        as_matrix([[1.0, np.inf]])
    with pytest.raises(ParameterError):
        as_matrix(np.zeros((0, 3)))
    with pytest.raises(ParameterError):
        as_matrix([1.0, 2.0])


def test_row_normalize_examples():
    np.testing.assert_allclose(row_normalize([[3, 4], [0, 1]]), [[0.6, 0.8], [0, 1]], atol=1e-15)
    np.testing.assert_array_equal(row_normalize([[0, 0], [2, 0]]), [[0, 0], [1, 0]])


def test_col_normalize_examples(rng):
    np.testing.assert_allclose(col_normalize([[3, 0], [4, 1]]), [[0.6, 0], [0.8, 1]], atol=1e-15)
    X = rng.standard_normal((5, 3))
    np.testing.assert_array_equal(col_normalize(X), row_normalize(X.T).T)
    Z = np.array([[1.0, 0.0], [2.0, 0.0]])
    np.testing.assert_array_equal(col_normalize(Z)[:, 1], 0.0)


@given(matrices)
def test_row_normalize_properties(X):
    Y = row_normalize(X)
    norms = np.linalg.norm(Y, axis=1)
    nz = np.any(X != 0, axis=1)
    np.testing.assert_allclose(norms[nz], 1.0, atol=1e-12)
    np.testing.assert_array_equal(Y[~nz], 0.0)
    np.testing.assert_allclose(row_normalize(Y), Y, atol=1e-12)


def test_f1_norm():
    assert f1_norm([[1, -2], [0, 3]]) == 6.0
    assert f1_norm(np.zeros((3, 2))) == 0.0


@given(matrices, st.floats(-10, 10, allow_nan=False))
def test_f1_homogeneity(X, c):
    assert f1_norm(c * X) == pytest.approx(abs(c) * f1_norm(X), rel=1e-12, abs=1e-300)


# --- truncated SVD ---------------------------------------------------------

def test_diagonal():
    fac = truncated_svd(np.diag([5.0, 3.0, 1.0]), 2)
    np.testing.assert_allclose(fac.d, [5, 3])
    np.testing.assert_allclose(np.abs(fac.U), np.eye(3)[:, :2], atol=1e-15)
    np.testing.assert_allclose(np.abs(fac.V), np.eye(3)[:, :2], atol=1e-15)


@pytest.mark.parametrize("shape", [(30, 12), (200, 100)])
def test_exact_rank_one(rng, shape):
    u0 = random_orthonormal(rng, shape[0], 1)[:, 0]
    v0 = random_orthonormal(rng, shape[1], 1)[:, 0]
    fac = truncated_svd(7 * np.outer(u0, v0), 1)
    assert fac.d[0] == pytest.approx(7, abs=1e-8)
    assert min(np.linalg.norm(fac.U[:, 0] - u0), np.linalg.norm(fac.U[:, 0] + u0)) < 1e-8
    assert min(np.linalg.norm(fac.V[:, 0] - v0), np.linalg.norm(fac.V[:, 0] + v0)) < 1e-8


def test_singular_values_match_gram_eigensolver(rng):
    X = rng.standard_normal((8, 5))
    fac = truncated_svd(X, 3)
    lam = np.sort(np.linalg.eigvalsh(X.T @ X))[::-1][:3]
    np.testing.assert_allclose(fac.d, np.sqrt(lam), rtol=1e-8)


@pytest.mark.parametrize("shape,R", [((300, 120), 3), ((150, 400), 5), ((500, 90), 1)])
def test_iterative_path_agrees_with_dense(rng, shape, R):
    # a low-rank signal plus noise so the gap after R is clear
    n, p = shape
    U = random_orthonormal(rng, n, R)
    V = random_orthonormal(rng, p, R)
    X = (U * np.linspace(60, 40, R)) @ V.T + rng.standard_normal(shape)
    it = truncated_svd(X, R)
    dense = truncated_svd(X, R, dense_cutoff=10_000)
    np.testing.assert_allclose(it.d, dense.d, rtol=1e-9)
    assert principal_angle(it.V, dense.V) < 1e-6
    assert principal_angle(it.U, dense.U) < 1e-6
    G = X.T @ X
    for t in it.triples:
        assert np.linalg.norm(G @ t.v - t.d ** 2 * t.v) <= 1e-10 * it.d[0] ** 2 * 10


def test_orthonormal_and_sorted(rng):
    X = rng.standard_normal((120, 80))
    fac = truncated_svd(X, 4)
    np.testing.assert_allclose(fac.U.T @ fac.U, np.eye(4), atol=1e-8)
    np.testing.assert_allclose(fac.V.T @ fac.V, np.eye(4), atol=1e-8)
    assert np.all(np.diff(fac.d) <= 0)
    # sign convention
    for t in fac.triples:
        assert t.v[np.argmax(np.abs(t.v))] > 0


def test_deterministic(rng):
    X = rng.standard_normal((150, 100))
    a, b = truncated_svd(X, 3, seed=4), truncated_svd(X, 3, seed=4)
    assert np.array_equal(a.U, b.U) and np.array_equal(a.V, b.V) and np.array_equal(a.d, b.d)


def test_errors(rng):
    X = rng.standard_normal((5, 4))
    with pytest.raises(ParameterError):
        truncated_svd(X, 0)
    with pytest.raises(ParameterError):
        truncated_svd(X, 5)
    with pytest.raises(ParameterError):
        truncated_svd(X, 1, tol=0)
    # no spectral gap and a one-sweep cap: the iterative path gives up
    with pytest.raises(ConvergenceError) as ei:
        truncated_svd(rng.standard_normal((200, 150)), 3, max_iter=1, tol=1e-14)
    assert ei.value.iterations == 1


@given(st.integers(0, 2**32 - 1))
def test_eckart_young_spot_check(seed):
    r = np.random.default_rng(seed)
    n, p, R = int(r.integers(2, 9)), int(r.integers(2, 9)), 1
    R = int(r.integers(1, min(n, p) + 1))
    X = r.standard_normal((n, p))
    err = np.linalg.norm(X - truncated_svd(X, R).reconstruct())
    for _ in range(20):
        M = r.standard_normal((n, R)) @ r.standard_normal((R, p))
        assert err <= np.linalg.norm(X - M) + 1e-10


def test_svd_triple_validation():
    with pytest.raises(ParameterError):
        SvdTriple(-1.0, np.array([1.0]), np.array([1.0]))
    with pytest.raises(ParameterError):
        SvdTriple(1.0, np.array([2.0]), np.array([1.0]))


# --- angles ----------------------------------------------------------------

def test_angle_examples():
    e = np.eye(4)
    assert principal_angle(e[:, :2], e[:, :2]) == 0.0
    assert principal_angle(e[:, 0], e[:, 1]) == pytest.approx(math.pi / 2)
    assert principal_angle(e[:2, 0], np.array([1.0, 1.0]) / math.sqrt(2)) == pytest.approx(math.pi / 4)
    with pytest.raises(ParameterError):
        principal_angle(e[:, :2], e[:, :1])


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(5, 9))
def test_angle_against_scipy(seed, R, k):
    r = np.random.default_rng(seed)
    A = random_orthonormal(r, k, R)
    B = random_orthonormal(r, k, R)
    ref = float(np.max(subspace_angles(A, B)))
    assert principal_angle(A, B) == pytest.approx(ref, abs=1e-10)
    assert principal_angle(B, A) == pytest.approx(principal_angle(A, B), abs=1e-12)
    Q = random_orthonormal(r, R, R)
    assert principal_angle(A @ Q, B) == pytest.approx(principal_angle(A, B), abs=1e-10)
    assert principal_angle(A, A @ Q) < 1e-7


def test_small_angle_accuracy():
    for eps in (1e-3, 1e-6, 1e-9):
        b = np.array([math.cos(eps), math.sin(eps), 0.0])
        assert principal_angle(np.array([1.0, 0.0, 0.0]), b) == pytest.approx(eps, rel=1e-6)


def test_subspace_type(rng):
    S = Subspace.from_span(rng.standard_normal((6, 2)))
    assert (S.ambient_dim, S.dim) == (6, 2)
    with pytest.raises(ParameterError):
        Subspace(np.ones((3, 2)))
    assert principal_angle(S, S) < 1e-7


# --- CSV -------------------------------------------------------------------

def test_csv_roundtrip(tmp_path, rng):
    X = rng.standard_normal((4, 3)) * 1e5
    path = tmp_path / "m.csv"
    write_matrix_csv(path, X)
    np.testing.assert_array_equal(read_matrix_csv(path), X)


@pytest.mark.parametrize("text,line", [("1,2\n3\n", 2), ("1,2\n\n4,x\n", 3),
                                       ("1,nan\n", 1), ("1,2\n3,inf\n", 2)])
def test_csv_errors_carry_line(tmp_path, text, line):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(MatrixFormatError) as ei:
        read_matrix_csv(path)
    assert ei.value.line == line
    assert f"line {line}" in str(ei.value)


def test_csv_empty(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("\n")
    with pytest.raises(MatrixFormatError):
        read_matrix_csv(path)
