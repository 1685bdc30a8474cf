"""The radial slope profile psi(r, beta) and its asymptotic data.

psi solves the first-order problem

    psi' = g(psi) / r,   psi(1) = beta,
    g(v) = -(v / xi_upper) * (v^(k-l) - 1) / (v^(k-l) - xi_lower/xi_upper),

whose integrated form is the conserved relation

    psi^(m*xi_upper) * (1 - psi^(l-k)) = B(beta) * r^(-m),
    B(beta) = beta^(m*xi_upper) * (1 - beta^(l-k)),

with m = (k-l)/(xi_upper - xi_lower).  Two independent evaluation routes are
provided: a bracketed root solve of the integrated relation (the reference
path, accurate down to psi - 1 ~ 1e-300 thanks to a log-space
parameterization) and an adaptive Runge-Kutta integration of the initial
value problem (the cross-check).  psi decreases from beta to 1 and
psi - 1 ~ (B/(k-l)) r^(-m) at infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy import integrate

from .admissibility import xi_bounds
from .errors import StepFailureError
from .symfunc import VectorLike

IMPLICIT_RESIDUAL_RTOL = 1e-13   # |F(psi)| <= this * B(beta)
ODE_RTOL = 1e-10
ODE_ATOL = 1e-13
_BISECT_ITERS = 80


@dataclass(frozen=True)
class ProfileSpec:
    """Coefficients of the profile problem for one (k, l, spectrum, beta)."""

    k: int
    l: int
    xi_upper_k: float
    xi_lower_l: float
    beta: float

    def __post_init__(self):
        if not (0 <= self.l < self.k):
            raise ValueError(f"need 0 <= l < k, got k={self.k}, l={self.l}")
        if not (0.0 < self.xi_upper_k <= 1.0):
            raise ValueError(f"xi_upper_k = {self.xi_upper_k} outside (0, 1]")
        if not (0.0 <= self.xi_lower_l < self.xi_upper_k):
            raise ValueError(
                f"xi_lower_l = {self.xi_lower_l} must lie in [0, xi_upper_k)"
            )
        if not (self.beta >= 1.0):
            raise ValueError(f"beta = {self.beta} must be >= 1")

    @classmethod
    def from_eigenvalues(cls, k: int, l: int, a: VectorLike, beta: float) -> "ProfileSpec":
        _, upper = xi_bounds(k, a)
        lower, _ = xi_bounds(l, a)
        return cls(k=k, l=l, xi_upper_k=float(upper), xi_lower_l=float(lower), beta=float(beta))

    @property
    def m(self) -> float:
        return (self.k - self.l) / (self.xi_upper_k - self.xi_lower_l)

    def with_beta(self, beta: float) -> "ProfileSpec":
        return replace(self, beta=float(beta))


def amplitude(spec: ProfileSpec) -> float:
    """B(beta) = beta^(m*xi_upper) (1 - beta^(l-k)); zero at beta = 1."""
    beta = spec.beta
    if beta == 1.0:
        return 0.0
    d = spec.k - spec.l
    # beta^(m xi - d) * (beta^d - 1), all factors positive
    return math.exp((spec.m * spec.xi_upper_k - d) * math.log(beta)) * math.expm1(
        d * math.log(beta)
    )


def asymptotic_constant(spec: ProfileSpec) -> float:
    """Leading coefficient of psi - 1 ~ const * r^(-m)."""
    return amplitude(spec) / (spec.k - spec.l)


def _excess_log(spec: ProfileSpec, delta: np.ndarray) -> np.ndarray:
    """log of F0(delta) := (1+delta)^(m xi - d) ((1+delta)^d - 1), delta > 0."""
    d = spec.k - spec.l
    a_exp = spec.m * spec.xi_upper_k - d
    lp = np.log1p(delta)
    with np.errstate(divide="ignore"):
        return a_exp * lp + np.log(np.expm1(d * lp))


def solve_excess_many(spec: ProfileSpec, r: np.ndarray) -> np.ndarray:
    """Vectorized root solve for delta = psi - 1 from F0(delta) = B r^(-m).

    Works in x = log(delta): the relation is strictly increasing there, the
    bracket [x_lo, log(beta-1)] is guaranteed, and bisection preserves full
    relative accuracy of delta even when it underflows below the float
    spacing around psi = 1.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 1.0):
        raise ValueError("profile is defined for r >= 1")
    if spec.beta == 1.0:
        return np.zeros_like(r)

    out = np.empty_like(r)
    at_start = r == 1.0
    out[at_start] = spec.beta - 1.0
    rest = ~at_start
    if not np.any(rest):
        return out

    rv = r[rest]
    B = amplitude(spec)
    target = math.log(B) - spec.m * np.log(rv)
    hi_delta = spec.beta - 1.0
    x_hi = np.full_like(rv, math.log(hi_delta))
    # initial lower guess: for small delta, F0 ~ (k-l) delta
    x_lo = np.minimum(target - math.log(spec.k - spec.l), x_hi) - 1.0
    for _ in range(200):
        bad = _excess_log(spec, np.exp(x_lo)) > target
        if not np.any(bad):
            break
        x_lo = np.where(bad, x_lo - 4.0, x_lo)
    for _ in range(_BISECT_ITERS):
        x_mid = 0.5 * (x_lo + x_hi)
        high = _excess_log(spec, np.exp(x_mid)) > target
        x_hi = np.where(high, x_mid, x_hi)
        x_lo = np.where(high, x_lo, x_mid)
    out[rest] = np.exp(0.5 * (x_lo + x_hi))
    return out


def solve_implicit_many(spec: ProfileSpec, r: np.ndarray) -> np.ndarray:
    """Vectorized psi(r, beta) from the integrated relation."""
    return 1.0 + solve_excess_many(spec, r)


def solve_implicit(spec: ProfileSpec, r: float) -> float:
    """psi(r, beta) from the integrated relation (scalar convenience)."""
    return float(solve_implicit_many(spec, np.array([float(r)]))[0])


def excess_slope_many(spec: ProfileSpec, r: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Vectorized d psi / d r from the full-precision excess delta = psi - 1."""
    d = spec.k - spec.l
    q = spec.xi_lower_l / spec.xi_upper_k
    lp = np.log1p(delta)
    num = np.expm1(d * lp)
    den = np.exp(d * lp) - q
    return -((1.0 + delta) / spec.xi_upper_k) * num / den / r


def implicit_residual(spec: ProfileSpec, r: float, psi: float) -> float:
    """F(psi) = psi^(m xi - d)(psi^d - 1) - B r^(-m); ~0 along the profile."""
    if psi < 1.0:
        psi = 1.0
    d = spec.k - spec.l
    a_exp = spec.m * spec.xi_upper_k - d
    lp = math.log(psi)
    value = math.exp(a_exp * lp) * math.expm1(d * lp) if psi > 1.0 else 0.0
    return value - amplitude(spec) * float(r) ** (-spec.m)


def slope(spec: ProfileSpec, psi: float, r: float) -> float:
    """g(psi)/r: the right-hand side of the initial value problem."""
    return _g(spec, psi) / r


def _g(spec: ProfileSpec, v: float) -> float:
    d = spec.k - spec.l
    q = spec.xi_lower_l / spec.xi_upper_k
    if v <= 0.0:
        raise ValueError(f"profile value {v} out of range")
    num = math.expm1(d * math.log(v))          # v^d - 1, accurate near v = 1
    den = math.exp(d * math.log(v)) - q
    return -(v / spec.xi_upper_k) * num / den


def _g_prime(spec: ProfileSpec, v: float) -> float:
    d = spec.k - spec.l
    q = spec.xi_lower_l / spec.xi_upper_k
    vd = math.exp(d * math.log(v))
    h = math.expm1(d * math.log(v)) / (vd - q)
    h_prime = d * math.exp((d - 1) * math.log(v)) * (1.0 - q) / (vd - q) ** 2
    return -(h + v * h_prime) / spec.xi_upper_k


def psi_derivative(spec: ProfileSpec, r: float, psi_value: float) -> float:
    """d psi / d r at radius r given the profile value there; <= 0, = 0 at 1."""
    if psi_value == 1.0:
        return 0.0
    return slope(spec, psi_value, r)


@lru_cache(maxsize=64)
def _ode_dense(spec: ProfileSpec, r_max: float):
    sol = integrate.solve_ivp(
        lambda t, y: [slope(spec, y[0], t)],
        (1.0, r_max),
        [spec.beta],
        method="RK45",
        rtol=ODE_RTOL,
        atol=ODE_ATOL,
        dense_output=True,
    )
    if not sol.success:
        raise StepFailureError(f"adaptive integration stalled: {sol.message}")
    return sol


def solve_ode_many(spec: ProfileSpec, r: np.ndarray) -> np.ndarray:
    """psi by adaptive embedded Runge-Kutta; independent of the root solve."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 1.0):
        raise ValueError("profile is defined for r >= 1")
    if spec.beta == 1.0:
        return np.ones_like(r)
    out = np.full_like(r, spec.beta)
    beyond = r > 1.0
    if np.any(beyond):
        top = float(np.max(r))
        # integrate once to a tier boundary, reuse the dense output
        tier = 10.0 ** math.ceil(math.log10(top)) if top > 1.0 else 10.0
        sol = _ode_dense(spec, max(tier, 10.0))
        out[beyond] = sol.sol(r[beyond])[0]
    return out


def solve_ode(spec: ProfileSpec, r: float) -> float:
    return float(solve_ode_many(spec, np.array([float(r)]))[0])


def beta_sensitivity(spec: ProfileSpec, r: float) -> float:
    """d psi(r, beta) / d beta via the variational formula.

    Equals exp( integral_1^r g'(psi(tau)) / tau dtau ), which lies in (0, 1]
    because g' < 0 along the profile.
    """
    if spec.beta <= 1.0:
        raise ValueError("beta must exceed 1 for the sensitivity integral")
    r = float(r)
    if r == 1.0:
        return 1.0

    def integrand(tau: float) -> float:
        psi = solve_implicit(spec, tau)
        return _g_prime(spec, psi) / tau

    value, _ = integrate.quad(integrand, 1.0, r, epsabs=1e-13, epsrel=1e-12, limit=200)
    return math.exp(value)


@dataclass(frozen=True, eq=False)
class Profile:
    """Evaluator bundle for one spec: values, derivative, amplitude."""

    spec: ProfileSpec
    B_beta: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "B_beta", amplitude(self.spec))

    def value(self, r) -> np.ndarray | float:
        if np.ndim(r) == 0:
            return solve_implicit(self.spec, float(r))
        return solve_implicit_many(self.spec, np.asarray(r, dtype=float))

    def excess(self, r) -> np.ndarray | float:
        """psi - 1 at full relative precision."""
        if np.ndim(r) == 0:
            return float(solve_excess_many(self.spec, np.array([float(r)]))[0])
        return solve_excess_many(self.spec, np.asarray(r, dtype=float))

    def value_ode(self, r) -> np.ndarray | float:
        if np.ndim(r) == 0:
            return solve_ode(self.spec, float(r))
        return solve_ode_many(self.spec, np.asarray(r, dtype=float))

    def derivative(self, r) -> np.ndarray | float:
        if np.ndim(r) == 0:
            return psi_derivative(self.spec, float(r), self.value(float(r)))
        r = np.asarray(r, dtype=float)
        psi = self.value(r)
        return np.array(
            [psi_derivative(self.spec, ri, pi) for ri, pi in zip(r, psi)]
        )

    def derivative_given(self, r: np.ndarray, psi: np.ndarray) -> np.ndarray:
        """Vectorized slope when psi(r) is already known."""
        d = self.spec.k - self.spec.l
        q = self.spec.xi_lower_l / self.spec.xi_upper_k
        lp = np.log(psi)
        num = np.expm1(d * lp)
        den = np.exp(d * lp) - q
        return -(psi / self.spec.xi_upper_k) * num / den / r
