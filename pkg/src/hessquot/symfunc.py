"""Algebra of elementary symmetric functions.

Everything here works for a generic scalar type: exact rationals
(``fractions.Fraction`` / ``int``) give bit-exact identities, floats give the
fast path.  The evaluation scheme is the incremental product

    prod_i (1 + p_i t) = sum_k sigma_k(p) t^k,

built one factor at a time, which is O(n^2) overall and stable for
mixed-sign entries.  Deletion values sigma_{k;i} (entry i removed) come from
one synthetic-division step of the product polynomial by (1 + p_i t).

Conventions throughout: sigma_{-1} = 0, sigma_0 = 1, sigma_k = 0 for k > n.
Deletion indices i, j are 1-based to match the usual subscript notation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence, Union

from .errors import NotInConeError

Scalar = Union[int, float, Fraction]


class ScalarKind(enum.Enum):
    """Arithmetic mode of a vector: identities are bit-exact under rationals."""

    EXACT_RATIONAL = "exact-rational"
    FLOAT64 = "float64"

    @classmethod
    def of(cls, p: "VectorLike") -> "ScalarKind":
        return cls.EXACT_RATIONAL if is_exact(p) else cls.FLOAT64

# Relative tolerance for strict cone inequalities evaluated in floats.  The
# scale is sigma_j of the entrywise absolute values.  Exact inputs use zero
# tolerance; callers that sit near the cone boundary should pass Fractions.
GAMMA_FLOAT_RTOL = 1e-14


@dataclass(frozen=True)
class SymVec:
    """An n-vector of eigenvalue-like scalars.

    Entries are kept in the order given; ``ascending()`` returns the sorted
    view used by the ordering-sensitive formulas.
    """

    entries: tuple

    def __post_init__(self):
        if len(self.entries) < 1:
            raise ValueError("SymVec needs at least one entry")
        for v in self.entries:
            if isinstance(v, float) and not (v == v and abs(v) != float("inf")):
                raise ValueError(f"non-finite entry {v!r}")

    @classmethod
    def of(cls, values: Sequence[Scalar]) -> "SymVec":
        return cls(tuple(values))

    @property
    def n(self) -> int:
        return len(self.entries)

    def ascending(self) -> "SymVec":
        return SymVec(tuple(sorted(self.entries)))

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, Rational) for v in self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


VectorLike = Union[SymVec, Sequence[Scalar]]


def _entries(p: VectorLike) -> tuple:
    if isinstance(p, SymVec):
        return p.entries
    return tuple(p)


def is_exact(p: VectorLike) -> bool:
    return all(isinstance(v, Rational) for v in _entries(p))


def elementary_coefficients(p: VectorLike) -> list:
    """All values sigma_0(p), ..., sigma_n(p) as one list."""
    values = _entries(p)
    coeffs = [1]
    for x in values:
        coeffs.append(0)
        for j in range(len(coeffs) - 1, 0, -1):
            coeffs[j] = coeffs[j] + x * coeffs[j - 1]
    return coeffs


def sigma(k: int, p: VectorLike) -> Scalar:
    """sigma_k(p) with the conventions sigma_{-1}=0, sigma_0=1, sigma_{>n}=0."""
    values = _entries(p)
    if k < -1:
        raise ValueError(f"k = {k} is below the supported range (k >= -1)")
    if k == -1:
        return 0
    if k == 0:
        return 1
    if k > len(values):
        return 0
    return elementary_coefficients(values)[k]


class SigmaTable:
    """Precomputed sigma_k and deletion values for one vector.

    Building the table is O(n^2); each deletion row sigma_{.;i} is one O(n)
    synthetic division of the product polynomial by (1 + p_i t), computed
    lazily and cached.
    """

    def __init__(self, p: VectorLike):
        self.values = _entries(p)
        self.n = len(self.values)
        self.coeffs = elementary_coefficients(self.values)
        self._omit_rows: dict[int, list] = {}

    def sigma(self, k: int) -> Scalar:
        if k < -1:
            raise ValueError(f"k = {k} is below the supported range")
        if k == -1 or k > self.n:
            return 0
        if k == 0:
            return 1
        return self.coeffs[k]

    def _row(self, i: int) -> list:
        # i is 1-based; the row holds sigma_0,...,sigma_{n-1} of p without p_i.
        # Exact inputs divide the product polynomial by (1 + p_i t) in one
        # O(n) synthetic-division sweep (exact, no rounding).  Floats re-expand
        # the deleted factor list instead: the division recurrence amplifies
        # rounding by powers of p_i, while re-expansion stays stable at the
        # same cached O(n^2)-per-row cost as the table build.
        row = self._omit_rows.get(i)
        if row is None:
            if not (1 <= i <= self.n):
                raise IndexError(f"deletion index i = {i} out of range 1..{self.n}")
            x = self.values[i - 1]
            if isinstance(x, Rational):
                row = [1]
                for j in range(1, self.n):
                    row.append(self.coeffs[j] - x * row[j - 1])
            else:
                rest = [v for s, v in enumerate(self.values) if s != i - 1]
                row = elementary_coefficients(rest)
            self._omit_rows[i] = row
        return row

    def omit(self, k: int, i: int) -> Scalar:
        """sigma_{k;i}: sigma_k of the vector with entry i deleted."""
        if k < -1:
            raise ValueError(f"k = {k} is below the supported range")
        if k == -1 or k > self.n - 1:
            return 0
        if k == 0:
            return 1
        return self._row(i)[k]

    def omit2(self, k: int, i: int, j: int) -> Scalar:
        """sigma_{k;i,j}: sigma_k with entries i and j deleted (i != j)."""
        if i == j:
            raise ValueError("omit2 requires two distinct indices")
        for idx in (i, j):
            if not (1 <= idx <= self.n):
                raise IndexError(f"deletion index {idx} out of range 1..{self.n}")
        if k < -1:
            raise ValueError(f"k = {k} is below the supported range")
        if k == -1 or k > self.n - 2:
            return 0
        if k == 0:
            return 1
        rest = [v for s, v in enumerate(self.values, start=1) if s not in (i, j)]
        return elementary_coefficients(rest)[k]


def sigma_omit(k: int, i: int, p: VectorLike) -> Scalar:
    """sigma_{k;i}(p) = sigma_k of p with entry i (1-based) deleted."""
    return SigmaTable(p).omit(k, i)


def sigma_omit2(k: int, i: int, j: int, p: VectorLike) -> Scalar:
    """sigma_{k;i,j}(p) with two distinct (1-based) entries deleted."""
    return SigmaTable(p).omit2(k, i, j)


def sigma_rank_one(k: int, p: VectorLike, q: VectorLike, s: Scalar) -> Scalar:
    """sigma_k of the eigenvalues of diag(p) + s q q^T, without forming it.

    Uses sigma_k(lambda(M)) = sigma_k(p) + s * sum_i sigma_{k-1;i}(p) q_i^2.
    """
    pv = _entries(p)
    qv = _entries(q)
    if len(pv) != len(qv):
        raise ValueError("p and q must have the same length")
    if not (1 <= k <= len(pv)):
        raise ValueError(f"k = {k} out of range 1..{len(pv)}")
    table = SigmaTable(pv)
    acc = 0
    for i, qi in enumerate(qv, start=1):
        acc = acc + table.omit(k - 1, i) * qi * qi
    return table.sigma(k) + s * acc


def _gamma_scales(p: VectorLike) -> list:
    return elementary_coefficients([abs(v) for v in _entries(p)])


def in_gamma_k(k: int, lam: VectorLike) -> bool:
    """True iff sigma_j(lam) > 0 for all j = 1..k.

    Exact inputs use strict zero-tolerance inequalities; float inputs allow a
    relative tolerance of GAMMA_FLOAT_RTOL against the absolute-value scale.
    """
    values = _entries(lam)
    if not (1 <= k <= len(values)):
        raise ValueError(f"k = {k} out of range 1..{len(values)}")
    coeffs = elementary_coefficients(values)
    if is_exact(values):
        return all(coeffs[j] > 0 for j in range(1, k + 1))
    scales = _gamma_scales(values)
    return all(coeffs[j] > GAMMA_FLOAT_RTOL * scales[j] for j in range(1, k + 1))


def in_gamma_plus(lam: VectorLike) -> bool:
    """True iff every entry is strictly positive (the positive cone)."""
    values = _entries(lam)
    if is_exact(values):
        return all(v > 0 for v in values)
    scale = max(abs(v) for v in values)
    return all(v > GAMMA_FLOAT_RTOL * scale for v in values)


def quotient_ellipticity_gap(k: int, l: int, i: int, lam: VectorLike) -> Scalar:
    """Numerator of d(sigma_k/sigma_l)/d(lam_i) on Gamma_k.

    Returns sigma_{k-1;i} sigma_l - sigma_k sigma_{l-1;i}, which is >= 0 on
    Gamma_k; the full derivative is gap / sigma_l^2.
    """
    values = _entries(lam)
    if not (0 <= l < k <= len(values)):
        raise ValueError(f"need 0 <= l < k <= n, got k={k}, l={l}, n={len(values)}")
    if not in_gamma_k(k, values):
        raise NotInConeError(f"lambda = {values} is not in Gamma_{k}")
    table = SigmaTable(values)
    return table.omit(k - 1, i) * table.sigma(l) - table.sigma(k) * table.omit(l - 1, i)


def newton_check(j: int, lam: VectorLike) -> bool:
    """Newton's inequality sigma_{j-1} sigma_{j+1} <= sigma_j^2.

    Holds for every real vector; exposed as a self-test.  Float inputs get a
    small relative slack for rounding.
    """
    values = _entries(lam)
    n = len(values)
    if not (1 <= j <= n - 1):
        raise ValueError(f"j = {j} out of range 1..{n - 1}")
    coeffs = elementary_coefficients(values)
    lhs = coeffs[j - 1] * coeffs[j + 1]
    rhs = coeffs[j] * coeffs[j]
    if is_exact(values):
        return lhs <= rhs
    slack = 1e-12 * (abs(lhs) + abs(rhs) + 1.0)
    return lhs <= rhs + slack
