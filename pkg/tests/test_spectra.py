"""Jacobi eigensolver and orthogonal conjugation."""

import numpy as np
import pytest

from hessquot.errors import NotOrthogonalError
from hessquot.spectra import conjugate_by, eigh, quadratic_form, symmetrize


def test_diagonal_input():
    d = eigh(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(d.values, [1.0, 2.0, 3.0], atol=0)
    # rows are eigenvectors: a signed permutation for diagonal input
    assert np.max(np.abs(np.abs(d.vectors) - np.eye(3)[[1, 2, 0]])) < 1e-14


def test_classic_2x2():
    d = eigh(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.max(np.abs(d.values - np.array([1.0, 3.0]))) < 1e-14


def test_reconstruction_and_orthogonality_random():
    rng = np.random.default_rng(0)
    for _ in range(40):
        n = int(rng.integers(1, 11))
        A = symmetrize(rng.standard_normal((n, n)))
        d = eigh(A)
        Q = d.vectors
        assert np.max(np.abs(Q.T @ Q - np.eye(n))) <= 1e-12
        resid = np.max(np.abs(d.reconstruct() - A))
        scale = max(np.max(np.abs(A)), 1e-300)
        assert resid <= 1e-10 * scale
        assert np.all(np.diff(d.values) >= 0)


def test_deterministic_output():
    rng = np.random.default_rng(5)
    A = symmetrize(rng.standard_normal((6, 6)))
    d1 = eigh(A.copy())
    d2 = eigh(A.copy())
    assert np.array_equal(d1.values, d2.values)
    assert np.array_equal(d1.vectors, d2.vectors)


def test_conjugate_identity_and_rotation():
    M = np.diag([1.0, 2.0])
    assert np.array_equal(conjugate_by(np.eye(2), M), M)
    # 90-degree rotation swaps the axes
    Q = np.array([[0.0, -1.0], [1.0, 0.0]])
    out = conjugate_by(Q, M)
    assert np.max(np.abs(out - np.diag([2.0, 1.0]))) < 1e-15


def test_conjugate_preserves_spectrum():
    rng = np.random.default_rng(1)
    for _ in range(20):
        n = int(rng.integers(2, 8))
        M = symmetrize(rng.standard_normal((n, n)))
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        out = conjugate_by(Q, M)
        assert np.max(np.abs(eigh(out).values - eigh(M).values)) <= 1e-10


def test_conjugate_rejects_non_orthogonal():
    with pytest.raises(NotOrthogonalError):
        conjugate_by(np.array([[1.0, 0.5], [0.0, 1.0]]), np.eye(2))


def test_quadratic_form_shapes():
    A = np.diag([1.0, 2.0, 3.0])
    x = np.array([1.0, 1.0, 1.0])
    assert quadratic_form(A, x) == 6.0
    X = np.vstack([x, 2 * x])
    assert np.array_equal(quadratic_form(A, X), np.array([6.0, 24.0]))


def test_symmetrize_rejects_nonsquare():
    with pytest.raises(ValueError):
        symmetrize(np.ones((2, 3)))
