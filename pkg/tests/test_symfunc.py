"""Elementary symmetric function algebra: conventions, identities, cones."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hessquot.errors import NotInConeError
from hessquot.symfunc import (
    ScalarKind,
    SigmaTable,
    SymVec,
    in_gamma_k,
    in_gamma_plus,
    newton_check,
    quotient_ellipticity_gap,
    sigma,
    sigma_omit,
    sigma_omit2,
    sigma_rank_one,
)

fractions_vec = st.lists(
    st.fractions(min_value=-50, max_value=50, max_denominator=12),
    min_size=3,
    max_size=8,
)


def test_sigma_basic_values():
    assert sigma(2, [1, 2, 3]) == 11
    assert sigma(0, [5, 7]) == 1
    assert sigma(3, [1, 2]) == 0          # above the length
    assert sigma(-1, [1, 2, 3]) == 0
    assert sigma(3, [1, 2, 3]) == 6


def test_sigma_rejects_below_minus_one():
    with pytest.raises(ValueError):
        sigma(-2, [1, 2])


def test_sigma_omit_values():
    assert sigma_omit(1, 1, [1, 2, 3]) == 5
    assert sigma_omit(2, 3, [1, 2, 3]) == 2
    assert sigma_omit(0, 2, [1, 2, 3]) == 1
    assert sigma_omit(3, 1, [1, 2, 3]) == 0   # only two entries remain
    with pytest.raises(IndexError):
        sigma_omit(1, 4, [1, 2, 3])


def test_sigma_omit2_matches_double_deletion():
    p = [Fraction(1), Fraction(-2), Fraction(3), Fraction(5, 2)]
    for i in range(1, 5):
        for j in range(1, 5):
            if i == j:
                continue
            rest = [p[s] for s in range(4) if s not in (i - 1, j - 1)]
            for k in range(0, 3):
                assert sigma_omit2(k, i, j, p) == sigma(k, rest)


@settings(max_examples=100, deadline=None)
@given(fractions_vec)
def test_deletion_recursion_exact(p):
    table = SigmaTable(p)
    n = len(p)
    for k in range(0, n + 1):
        for i in range(1, n + 1):
            assert table.sigma(k) == table.omit(k, i) + p[i - 1] * table.omit(k - 1, i)


@settings(max_examples=100, deadline=None)
@given(fractions_vec)
def test_weighted_deletion_sum_exact(p):
    table = SigmaTable(p)
    n = len(p)
    for k in range(1, n + 1):
        total = sum(p[i - 1] * table.omit(k - 1, i) for i in range(1, n + 1))
        assert total == k * table.sigma(k)


@settings(max_examples=100, deadline=None)
@given(fractions_vec)
def test_newton_inequality_exact(p):
    for j in range(1, len(p)):
        assert newton_check(j, p)


def test_float_path_against_rational_oracle():
    # tolerance is relative to the cancellation-free scale sigma_k(|p|);
    # the values themselves can cancel to zero, where no float route can
    # deliver small error relative to the result
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = int(rng.integers(3, 9))
        p_exact = [
            Fraction(int(rng.integers(-99, 100)), int(rng.integers(1, 13)))
            for _ in range(n)
        ]
        p_float = [float(v) for v in p_exact]
        tf = SigmaTable(p_float)
        te = SigmaTable(p_exact)
        scales = SigmaTable([abs(v) for v in p_float])
        for k in range(0, n + 1):
            exact = float(te.sigma(k))
            tol = 1e-12 * max(1.0, scales.sigma(k))
            assert abs(tf.sigma(k) - exact) <= tol
        for i in range(1, n + 1):
            for k in range(0, n):
                exact = float(te.omit(k, i))
                tol = 1e-12 * max(1.0, scales.sigma(k))
                assert abs(tf.omit(k, i) - exact) <= tol


def test_rank_one_examples():
    # diag(1,1,1) + 2 e1 e1^T = diag(3,1,1): sigma_2 = 3 + 3 + 1
    assert sigma_rank_one(2, [1, 1, 1], [1, 0, 0], 2) == 7
    # zero perturbation
    p = [Fraction(1), Fraction(2), Fraction(5)]
    for k in (1, 2, 3):
        assert sigma_rank_one(k, p, [Fraction(1), Fraction(-3), Fraction(2)], 0) == sigma(k, p)


def test_rank_one_against_eigenvalues():
    from hessquot.spectra import eigh

    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        p = rng.uniform(-1, 1, n)
        q = rng.uniform(-1, 1, n)
        s = float(rng.uniform(-2, 2))
        M = np.diag(p) + s * np.outer(q, q)
        vals = eigh(M).values
        for k in range(1, n + 1):
            direct = float(sigma_rank_one(k, p.tolist(), q.tolist(), s))
            oracle = float(sigma(k, vals.tolist()))
            assert abs(direct - oracle) <= 1e-10 * max(1.0, abs(oracle))


def test_gamma_cone_membership():
    assert not in_gamma_k(2, [-1, 2, 2])          # sigma_2 = 0 exactly
    assert in_gamma_k(2, [Fraction(-1, 2), 2, 2])  # sigma_2 = 2 > 0
    assert in_gamma_k(3, [1, 1, 1])
    assert not in_gamma_k(1, [-5, 1, 1])
    assert in_gamma_plus([1, 2, 3])
    assert not in_gamma_plus([0, 1, 2])


def test_gamma_cone_nesting_random():
    rng = np.random.default_rng(11)
    for _ in range(300):
        n = int(rng.integers(3, 9))
        p = [
            Fraction(int(rng.integers(-20, 100)), int(rng.integers(1, 13)))
            for _ in range(n)
        ]
        flags = [in_gamma_k(k, p) for k in range(1, n + 1)]
        for k in range(1, n):
            assert not (flags[k] and not flags[k - 1])


def test_ellipticity_gap_examples():
    # l = 0 reduces to a single deletion value
    assert quotient_ellipticity_gap(2, 0, 1, [1, 2, 3]) == 5
    # isotropic case, hand evaluation
    for i in (1, 2, 3):
        assert quotient_ellipticity_gap(3, 1, i, [1, 1, 1]) == 2


def test_ellipticity_gap_requires_cone():
    with pytest.raises(NotInConeError):
        quotient_ellipticity_gap(2, 0, 1, [-5, 1, 1])


def test_ellipticity_gap_matches_finite_difference():
    rng = np.random.default_rng(3)
    done = 0
    while done < 50:
        n = int(rng.integers(3, 6))
        lam = rng.uniform(0.2, 3.0, n)
        k = int(rng.integers(1, n + 1))
        l = int(rng.integers(0, k))
        if not in_gamma_k(k, lam.tolist()):
            continue
        done += 1
        i = int(rng.integers(1, n + 1))
        gap = float(quotient_ellipticity_gap(k, l, i, lam.tolist()))
        table = SigmaTable(lam.tolist())
        sl = table.sigma(l)
        h = 1e-6

        def quotient(shift):
            lam2 = lam.copy()
            lam2[i - 1] += shift
            t2 = SigmaTable(lam2.tolist())
            return t2.sigma(k) / t2.sigma(l)

        fd = (quotient(h) - quotient(-h)) / (2 * h)
        assert gap >= 0.0
        assert abs(gap / sl**2 - fd) <= 1e-5 * max(1.0, abs(fd))


def test_symvec_sorting_and_validation():
    v = SymVec.of([3, 1, 2])
    assert v.ascending().entries == (1, 2, 3)
    assert v.n == 3
    with pytest.raises(ValueError):
        SymVec.of([])
    with pytest.raises(ValueError):
        SymVec.of([1.0, float("nan")])


def test_scalar_kind_classification():
    assert ScalarKind.of([1, Fraction(2, 3)]) is ScalarKind.EXACT_RATIONAL
    assert ScalarKind.of([1, 2.5]) is ScalarKind.FLOAT64
    assert ScalarKind.of(SymVec.of([Fraction(1)])) is ScalarKind.EXACT_RATIONAL
