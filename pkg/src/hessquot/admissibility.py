"""Directional ratios, their bounds, the decay exponent, and admissibility.

For a positive vector a (sorted ascending) and a nonzero direction x, the
ratio

    Xi_k(a, x) = sum_i sigma_{k-1;i}(a) a_i^2 x_i^2
                 / (sigma_k(a) * sum_i a_i x_i^2)

is pinched between closed-form bounds attained on coordinate axes:

    xi_lower_k = a_1 sigma_{k-1;1}(a) / sigma_k(a)   (axis of the smallest entry)
    xi_upper_k = a_n sigma_{k-1;n}(a) / sigma_k(a)   (axis of the largest entry)

and the decay exponent for the (k, l) quotient problem is

    m_{k,l}(a) = (k - l) / (xi_upper_k - xi_lower_l),   m in (k-l, n].

A symmetric matrix A is admissible for (k, l) when its spectrum is positive
and sigma_k = sigma_l; the strict class additionally needs m > 2, which is
what makes the far-field tail integrable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import spectra
from .errors import NotAdmissibleError, NotPositiveConeError, ZeroVectorError
from .symfunc import (
    SigmaTable,
    SymVec,
    VectorLike,
    _entries,
    in_gamma_plus,
    is_exact,
)

# |sigma_k - sigma_l| <= ADMISSIBLE_RTOL * max(sigma_k, sigma_l) in float mode;
# exact inputs are compared exactly.
ADMISSIBLE_RTOL = 1e-10


def _sorted_positive(a: VectorLike):
    values = tuple(sorted(_entries(a)))
    if not in_gamma_plus(values):
        raise NotPositiveConeError(f"a = {values} is not strictly positive")
    return values


def xi_at(k: int, a: VectorLike, x: VectorLike):
    """Xi_k(a, x) for a nonzero direction x; Xi_0 = 0 by convention."""
    av = _sorted_positive(a)
    xv = _entries(x)
    if len(xv) != len(av):
        raise ValueError("a and x must have the same length")
    if all(v == 0 for v in xv):
        raise ZeroVectorError("direction x must be nonzero")
    if k == 0:
        return Fraction(0) if is_exact(av) and is_exact(xv) else 0.0
    if not (1 <= k <= len(av)):
        raise ValueError(f"k = {k} out of range 0..{len(av)}")
    table = SigmaTable(av)
    num = 0
    den = 0
    for i, (ai, xi) in enumerate(zip(av, xv), start=1):
        x2 = xi * xi
        num = num + table.omit(k - 1, i) * ai * ai * x2
        den = den + ai * x2
    if is_exact(av) and is_exact(xv):
        return Fraction(num, 1) / (Fraction(table.sigma(k)) * Fraction(den))
    return num / (table.sigma(k) * den)


def xi_bounds(k: int, a: VectorLike):
    """(xi_lower_k, xi_upper_k) by the closed forms; (0,0) for k=0, (1,1) for k=n."""
    av = _sorted_positive(a)
    n = len(av)
    exact = is_exact(av)
    if k == 0:
        zero = Fraction(0) if exact else 0.0
        return zero, zero
    if not (1 <= k <= n):
        raise ValueError(f"k = {k} out of range 0..{n}")
    if k == n:
        one = Fraction(1) if exact else 1.0
        return one, one
    table = SigmaTable(av)
    sk = table.sigma(k)
    lower = av[0] * table.omit(k - 1, 1)
    upper = av[-1] * table.omit(k - 1, n)
    if exact:
        return Fraction(lower, 1) / Fraction(sk), Fraction(upper, 1) / Fraction(sk)
    return lower / sk, upper / sk


def m_exponent(k: int, l: int, a: VectorLike):
    """Decay exponent m_{k,l}(a) = (k-l)/(xi_upper_k - xi_lower_l)."""
    if not (0 <= l < k):
        raise ValueError(f"need 0 <= l < k, got k={k}, l={l}")
    _, upper_k = xi_bounds(k, a)
    lower_l, _ = xi_bounds(l, a)
    diff = upper_k - lower_l
    if isinstance(diff, Fraction):
        return Fraction(k - l) / diff
    return (k - l) / diff


def c_star(n: int, k: int, l: int):
    """The balanced radius (C_n^l / C_n^k)^(1/(k-l)); c_star * I is admissible."""
    if not (0 <= l < k <= n):
        raise ValueError(f"need 0 <= l < k <= n, got n={n}, k={k}, l={l}")
    ratio = Fraction(math.comb(n, l), math.comb(n, k))
    if k - l == 1:
        return ratio
    return float(ratio) ** (1.0 / (k - l))


@dataclass(frozen=True)
class XiProfile:
    """Bundle of the bound/exponent data for one (a, k, l)."""

    a: SymVec
    k: int
    l: int
    xi_upper_k: object
    xi_lower_l: object
    m: object

    @classmethod
    def compute(cls, k: int, l: int, a: VectorLike) -> "XiProfile":
        av = SymVec.of(_sorted_positive(a))
        _, upper = xi_bounds(k, av)
        lower, _ = xi_bounds(l, av)
        diff = upper - lower
        m = Fraction(k - l) / diff if isinstance(diff, Fraction) else (k - l) / diff
        return cls(a=av, k=k, l=l, xi_upper_k=upper, xi_lower_l=lower, m=m)


@dataclass(frozen=True, eq=False)
class AdmissibleMatrix:
    """Classification record for a symmetric matrix against the (k, l) classes."""

    A: np.ndarray
    a: np.ndarray            # spectrum, ascending
    k: int
    l: int
    in_A_kl: bool            # positive spectrum and sigma_k = sigma_l
    in_Atilde_kl: bool       # additionally m_{k,l} > 2
    rho: float               # scaling with rho * A admissible (when spectrum positive)
    c_star: float
    m: float                 # decay exponent of the spectrum (nan if not positive)

    def require_strictly_admissible(self) -> None:
        if not self.in_A_kl:
            raise NotAdmissibleError(
                f"spectrum {self.a.tolist()} is not admissible for (k,l)=({self.k},{self.l}): "
                "needs a positive spectrum with sigma_k = sigma_l "
                f"(rescale by rho = {self.rho:.17g} to balance)"
            )
        if not self.in_Atilde_kl:
            raise NotAdmissibleError(
                f"decay exponent m = {self.m:.17g} <= 2 for (k,l)=({self.k},{self.l}); "
                "the construction requires m > 2"
            )


def classify(A: np.ndarray, k: int, l: int) -> AdmissibleMatrix:
    """Classify A by spectrum: admissibility flags, balancing factor, exponent.

    Non-symmetric input is symmetrized first; flags express failures, so this
    never raises for finite input.
    """
    M = spectra.symmetrize(A)
    n = M.shape[0]
    if not (0 <= l < k <= n):
        raise ValueError(f"need 0 <= l < k <= n, got n={n}, k={k}, l={l}")
    a = spectra.eigh(M).values
    table = SigmaTable([float(v) for v in a])
    sk = table.sigma(k)
    sl = table.sigma(l)
    positive = in_gamma_plus([float(v) for v in a])
    rho = float("nan")
    m = float("nan")
    balanced = False
    if positive:
        rho = (sk / sl) ** (-1.0 / (k - l))
        m = float(m_exponent(k, l, [float(v) for v in a]))
        balanced = abs(sk - sl) <= ADMISSIBLE_RTOL * max(abs(sk), abs(sl))
    in_A = positive and balanced
    return AdmissibleMatrix(
        A=M,
        a=a,
        k=k,
        l=l,
        in_A_kl=in_A,
        in_Atilde_kl=bool(in_A and m > 2.0),
        rho=rho,
        c_star=float(c_star(n, k, l)),
        m=m,
    )


def prop_admissible_exponent(k: int, l: int, a: VectorLike) -> bool:
    """Whether the balanced vector a has decay exponent m > 2.

    Requires sigma_k(a) = sigma_l(a) (raises NotAdmissibleError otherwise).
    Whenever k - l >= 2 the result is guaranteed True; for k = n, l = 0 the
    exponent is checked to be exactly n.
    """
    av = _sorted_positive(a)
    table = SigmaTable(av)
    sk, sl = table.sigma(k), table.sigma(l)
    if is_exact(av):
        balanced = sk == sl
    else:
        balanced = abs(sk - sl) <= ADMISSIBLE_RTOL * max(abs(sk), abs(sl))
    if not balanced:
        raise NotAdmissibleError(
            f"sigma_{k} = {sk} differs from sigma_{l} = {sl}; vector is not balanced"
        )
    m = m_exponent(k, l, av)
    if k == len(av) and l == 0:
        n = len(av)
        if isinstance(m, Fraction):
            assert m == n, f"m_{{n,0}} should be exactly n, got {m}"
        else:
            assert abs(m - n) <= 1e-12 * n, f"m_{{n,0}} should be n, got {m!r}"
    result = m > 2
    assert result or k - l < 2, (
        f"impossible: k-l = {k - l} >= 2 but m = {m} <= 2"
    )
    return bool(result)
