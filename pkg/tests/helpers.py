"""Shared generators for the test suite."""

from fractions import Fraction

import numpy as np


def frac_vector(rng, n, lo=-99, hi=99):
    return [
        Fraction(int(rng.integers(lo, hi + 1)), int(rng.integers(1, 13)))
        for _ in range(n)
    ]


def positive_frac_vector(rng, n):
    return frac_vector(rng, n, lo=1, hi=99)


def random_orthogonal(rng, n):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q


def balanced_spectrum(rng, n, k, l, spread=1.0):
    """Positive ascending spectrum with sigma_k = sigma_l and exponent > 2."""
    from hessquot.admissibility import m_exponent
    from hessquot.symfunc import SigmaTable

    while True:
        a = np.sort(1.0 + spread * rng.uniform(0.0, 1.0, size=n))
        if float(m_exponent(k, l, a.tolist())) <= 2.05:
            continue
        t = SigmaTable(a.tolist())
        rho = (t.sigma(k) / t.sigma(l)) ** (-1.0 / (k - l))
        return rho * a
