"""Generalized radially symmetric subsolutions and their verification.

For a positive definite A with spectrum a and ellipsoidal radius
r_A(x) = sqrt(x^T A x), the candidate subsolution is

    Phi(x) = alpha + integral_gamma^{r_A(x)} tau * psi(tau, beta) dtau
           = r_A(x)^2 / 2 + (mu_gamma + alpha - gamma^2/2) - mu_{r_A(x)},

where the tail integral mu_R = integral_R^inf tau (psi(tau) - 1) dtau is
finite exactly when the decay exponent m exceeds 2.  In the frame where A is
diagonal the Hessian is diag(psi a) plus a rank-one term, so every
sigma_j(lambda(D^2 Phi)) is available in closed form; the verification
routine checks sigma_j > 0 for j <= k and sigma_k >= sigma_l at sample
points, which is the computable content of the subsolution property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import profile as profile_mod
from . import spectra, symfunc
from .admissibility import classify
from .errors import DivergentTailError, InsideExcludedRegionError
from .profile import Profile, ProfileSpec
from .spectra import EigenDecomposition, quadratic_form

TAIL_ABS_RTOL = 1e-10       # truncation target: <= this * max(1, result)
PANEL_REFINE_RTOL = 1e-12   # 16- vs 32-node Gauss-Legendre agreement per build
QUOTIENT_SLACK = 1e-12      # sigma_k - sigma_l >= -slack * max(sigma_k, 1)


@lru_cache(maxsize=8)
def _leggauss(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


class TailIntegral:
    """Evaluator of mu_R(beta) built on log-spaced Gauss-Legendre panels.

    Panels cover [1, r_cut] in log radius; beyond r_cut the integrand is
    replaced by its leading power law, whose integral is
    (B/(k-l)) * r^(2-m) / (m-2).  r_cut grows (panel blocks are appended)
    until two successive truncations agree within TAIL_ABS_RTOL.
    """

    def __init__(self, spec: ProfileSpec, panels_per_doubling: int = 8):
        if spec.m <= 2.0:
            raise DivergentTailError(
                f"decay exponent m = {spec.m:.17g} <= 2: tail integral diverges"
            )
        if spec.beta <= 1.0:
            raise ValueError("TailIntegral expects beta > 1 (beta = 1 gives 0)")
        self.spec = spec
        self.tail_coeff = profile_mod.asymptotic_constant(spec)
        self._du = math.log(2.0) / panels_per_doubling
        self._boundaries = np.array([0.0])   # u = log r panel edges
        self._cum = np.array([0.0])          # integral over [1, e^u_j]
        self._mu_one: float | None = None    # mu at R = 1 once converged
        self._build()

    def _integrand(self, u: np.ndarray) -> np.ndarray:
        # tau (psi - 1) dtau = e^{2u} delta(e^u) du
        return np.exp(2.0 * u) * profile_mod.solve_excess_many(self.spec, np.exp(u))

    def _panel_sums(self, ua: np.ndarray, ub: np.ndarray, order: int) -> np.ndarray:
        nodes, weights = _leggauss(order)
        half = 0.5 * (ub - ua)
        mid = 0.5 * (ua + ub)
        u = mid[:, None] + half[:, None] * nodes[None, :]
        vals = self._integrand(u.ravel()).reshape(u.shape)
        return half * (vals @ weights)

    def _analytic_tail(self, r: np.ndarray | float) -> np.ndarray | float:
        m = self.spec.m
        return self.tail_coeff * np.asarray(r, dtype=float) ** (2.0 - m) / (m - 2.0)

    def _build(self) -> None:
        last_total = None
        stable = 0
        for _ in range(120):  # each block doubles r_cut
            u_last = self._boundaries[-1]
            ua = u_last + self._du * np.arange(8)
            ub = ua + self._du
            coarse = self._panel_sums(ua, ub, 16)
            fine = self._panel_sums(ua, ub, 32)
            diff = float(np.max(np.abs(fine - coarse)))
            scale = max(1.0, float(np.max(np.abs(fine))))
            if diff > PANEL_REFINE_RTOL * scale:
                # halve panel width once and retry the block
                self._du *= 0.5
                continue
            self._boundaries = np.concatenate([self._boundaries, ub])
            self._cum = np.concatenate([self._cum, self._cum[-1] + np.cumsum(fine)])
            total = self._cum[-1] + float(self._analytic_tail(math.exp(ub[-1])))
            if last_total is not None:
                if abs(total - last_total) <= TAIL_ABS_RTOL * max(1.0, abs(total)):
                    stable += 1
                    if stable >= 2:
                        self._mu_one = total
                        return
                else:
                    stable = 0
            last_total = total
        self._mu_one = self._cum[-1] + float(
            self._analytic_tail(math.exp(self._boundaries[-1]))
        )

    @property
    def r_cut(self) -> float:
        return math.exp(float(self._boundaries[-1]))

    def mu(self, r) -> np.ndarray | float:
        """mu_r(beta) for scalar or array radii >= 1."""
        scalar = np.ndim(r) == 0
        rv = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(rv < 1.0):
            raise ValueError("tail integral is defined for R >= 1")
        u = np.log(rv)
        out = np.empty_like(rv)
        far = u >= self._boundaries[-1]
        out[far] = self._analytic_tail(rv[far])
        near = ~far
        if np.any(near):
            un = u[near]
            idx = np.searchsorted(self._boundaries, un, side="right") - 1
            partial = np.zeros_like(un)
            width = un - self._boundaries[idx]
            has_width = width > 0.0
            if np.any(has_width):
                partial[has_width] = self._panel_sums(
                    self._boundaries[idx[has_width]], un[has_width], 16
                )
            out[near] = self._mu_one - (self._cum[idx] + partial)
        return float(out[0]) if scalar else out


@lru_cache(maxsize=256)
def _tail_cached(spec: ProfileSpec) -> TailIntegral:
    return TailIntegral(spec)


def mu(R: float, beta: float, spec: ProfileSpec):
    """mu_R(beta) = integral_R^inf tau (psi(tau, beta) - 1) dtau; >= 0.

    ``beta`` overrides the beta carried by ``spec`` so that a family in beta
    shares one set of coefficients.  R may be a scalar or an array.
    """
    if beta < 1.0:
        raise ValueError(f"beta = {beta} must be >= 1")
    if beta == 1.0:
        return 0.0 if np.ndim(R) == 0 else np.zeros(np.shape(R))
    return _tail_cached(spec.with_beta(float(beta))).mu(R)


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """Sublevel set {x : x^T A x < rho^2} of a positive definite A."""

    A: np.ndarray
    rho: float

    def radius(self, x: np.ndarray) -> np.ndarray | float:
        return np.sqrt(quadratic_form(self.A, x))

    def contains(self, x: np.ndarray) -> np.ndarray | bool:
        return quadratic_form(self.A, x) < self.rho * self.rho


@dataclass(eq=False)
class Subsolution:
    """Phi_{alpha,beta,gamma,A} with its profile and tail data.

    ``eval_floor`` is the lowest admissible ellipsoidal radius; it defaults
    to gamma (evaluation outside the closed core ellipsoid) but may be
    lowered to 1 when the anchor gamma sits above the profile's domain start.
    """

    alpha: float
    beta: float
    gamma: float
    A: np.ndarray
    k: int
    l: int
    eval_floor: float | None = None
    frame: EigenDecomposition = field(init=False)
    a: np.ndarray = field(init=False)
    spec: ProfileSpec = field(init=False)
    profile: Profile = field(init=False)
    mu_gamma: float = field(init=False)
    offset: float = field(init=False)

    def __post_init__(self):
        if self.beta < 1.0:
            raise ValueError(f"beta = {self.beta} must be >= 1")
        if self.gamma < 1.0:
            raise ValueError(f"gamma = {self.gamma} must be >= 1")
        self.A = spectra.symmetrize(self.A)
        record = classify(self.A, self.k, self.l)
        record.require_strictly_admissible()
        self.frame = spectra.eigh(self.A)
        self.a = self.frame.values
        self.spec = ProfileSpec.from_eigenvalues(self.k, self.l, self.a.tolist(), self.beta)
        self.profile = Profile(self.spec)
        if self.eval_floor is None:
            self.eval_floor = self.gamma
        self.mu_gamma = float(mu(self.gamma, self.beta, self.spec))
        self.offset = self.mu_gamma + self.alpha - 0.5 * self.gamma * self.gamma

    def radius(self, x: np.ndarray) -> np.ndarray | float:
        return np.sqrt(quadratic_form(self.A, x))

    def mu_of_radius(self, r) -> np.ndarray | float:
        return mu(r, self.beta, self.spec)

    def value_of_radius(self, r) -> np.ndarray | float:
        r = np.asarray(r, dtype=float) if np.ndim(r) else float(r)
        return 0.5 * np.square(r) + self.offset - self.mu_of_radius(r)

    def to_eigenframe(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.frame.vectors.T


def _check_floor(sub: Subsolution, r: np.ndarray) -> None:
    floor = sub.eval_floor
    if np.any(np.atleast_1d(r) < floor * (1.0 - 1e-12)):
        raise InsideExcludedRegionError(
            f"evaluation at ellipsoidal radius below the floor {floor:.17g}"
        )


def phi_eval(sub: Subsolution, x: np.ndarray) -> np.ndarray | float:
    """Phi(x) through the tail-integral form (single quadrature table)."""
    r2 = quadratic_form(sub.A, x)
    r = np.sqrt(r2)
    _check_floor(sub, r)
    return 0.5 * r2 + sub.offset - sub.mu_of_radius(r)


def phi_gradient(sub: Subsolution, x: np.ndarray) -> np.ndarray:
    """grad Phi = psi(r_A(x)) * A x (single point)."""
    x = np.asarray(x, dtype=float)
    r = float(sub.radius(x))
    _check_floor(sub, r)
    psi = sub.profile.value(r)
    return psi * (sub.A @ x)


def phi_hessian(sub: Subsolution, x: np.ndarray) -> np.ndarray:
    """D^2 Phi at one point, assembled exactly from psi and psi'.

    In the eigenframe the Hessian is diag(psi a_i) + (psi'/r)(a_i y_i)(a_j y_j);
    the result is conjugated back to the original frame.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("phi_hessian takes a single point")
    y = sub.to_eigenframe(x)
    r2 = float(np.sum(sub.a * y * y))
    r = math.sqrt(r2)
    _check_floor(sub, r)
    delta = sub.profile.excess(r)
    psi = 1.0 + delta
    dpsi = float(
        profile_mod.excess_slope_many(
            sub.spec, np.array([r]), np.array([delta])
        )[0]
    )
    ay = sub.a * y
    H_diag = np.diag(psi * sub.a) + (dpsi / r) * np.outer(ay, ay)
    Q = sub.frame.vectors
    return spectra.conjugate_by(Q, H_diag)


def hessian_sigmas(sub: Subsolution, X: np.ndarray) -> np.ndarray:
    """sigma_j(lambda(D^2 Phi)) for j = 1..k at a batch of points.

    Returns an array of shape (N, k).  Uses the rank-one update formula with
    the scaling sigma_j(psi a) = psi^j sigma_j(a), so no per-sample symmetric
    function expansion is needed.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = sub.to_eigenframe(X)
    a = sub.a
    r2 = Y * Y @ a
    r = np.sqrt(r2)
    _check_floor(sub, r)
    delta = profile_mod.solve_excess_many(sub.spec, r)
    psi = 1.0 + delta
    dpsi = profile_mod.excess_slope_many(sub.spec, r, delta)

    table = symfunc.SigmaTable([float(v) for v in a])
    W = (Y * a) ** 2                                   # (a_i y_i)^2
    out = np.empty((X.shape[0], sub.k))
    for j in range(1, sub.k + 1):
        tvec = np.array([table.omit(j - 1, i) for i in range(1, len(a) + 1)])
        Tj = W @ tvec
        out[:, j - 1] = table.sigma(j) * psi**j + psi ** (j - 1) * (dpsi / r) * Tj
    return out


@dataclass(eq=False)
class VerificationReport:
    """Outcome of a pointwise subsolution check, JSON-friendly."""

    kind: str
    parameters: dict
    sample_count: int
    radius_range: tuple[float, float]
    worst_margins: dict
    quotient_worst: float
    quotient_at_max_radius: float
    violations: list
    passed: bool
    sample_radii: np.ndarray | None = None
    sample_quotient_margins: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "parameters": self.parameters,
            "sample_count": self.sample_count,
            "radius_range": list(self.radius_range),
            "worst_margins": self.worst_margins,
            "quotient_worst": self.quotient_worst,
            "quotient_at_max_radius": self.quotient_at_max_radius,
            "violations": self.violations,
            "passed": self.passed,
            "tolerances": {"sigma_positive": 0.0, "quotient_slack": QUOTIENT_SLACK},
        }


def verify_subsolution(sub: Subsolution, samples: np.ndarray) -> VerificationReport:
    """Check sigma_j > 0 (j <= k) and sigma_k >= sigma_l at every sample.

    The quotient check allows -QUOTIENT_SLACK * max(sigma_k, 1) of absolute
    slack since the margin tends to 0 from above at infinity.
    """
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    sig = hessian_sigmas(sub, X)
    r = np.sqrt(quadratic_form(sub.A, X))
    if sub.l == 0:
        sig_l = np.ones(X.shape[0])
    else:
        sig_l = sig[:, sub.l - 1]
    quotient_margin = sig[:, sub.k - 1] - sig_l

    violations = []
    for j in range(1, sub.k + 1):
        bad = np.nonzero(sig[:, j - 1] <= 0.0)[0]
        for idx in bad[:10]:
            violations.append(
                {
                    "sample": int(idx),
                    "check": f"sigma_{j} > 0",
                    "value": float(sig[idx, j - 1]),
                    "radius": float(r[idx]),
                    "point": X[idx].tolist(),
                }
            )
    slack = QUOTIENT_SLACK * np.maximum(sig[:, sub.k - 1], 1.0)
    bad_q = np.nonzero(quotient_margin < -slack)[0]
    for idx in bad_q[:10]:
        violations.append(
            {
                "sample": int(idx),
                "check": "sigma_k - sigma_l >= 0",
                "value": float(quotient_margin[idx]),
                "radius": float(r[idx]),
                "point": X[idx].tolist(),
            }
        )

    order = np.argsort(r)
    return VerificationReport(
        kind="subsolution-margins",
        parameters={
            "alpha": sub.alpha,
            "beta": sub.beta,
            "gamma": sub.gamma,
            "k": sub.k,
            "l": sub.l,
            "spectrum": sub.a.tolist(),
            "decay_exponent": sub.spec.m,
        },
        sample_count=int(X.shape[0]),
        radius_range=(float(np.min(r)), float(np.max(r))),
        worst_margins={
            f"sigma_{j}": float(np.min(sig[:, j - 1])) for j in range(1, sub.k + 1)
        },
        quotient_worst=float(np.min(quotient_margin)),
        quotient_at_max_radius=float(quotient_margin[order[-1]]),
        violations=violations,
        passed=not violations,
        sample_radii=r,
        sample_quotient_margins=quotient_margin,
    )


def sample_shell_points(
    A: np.ndarray,
    r_lo: float,
    r_hi: float,
    count: int,
    seed: int = 0,
    include_axes: bool = True,
) -> np.ndarray:
    """Points with ellipsoidal radius log-uniform in (r_lo, r_hi].

    Directions are uniform on the sphere, then scaled onto the ellipsoidal
    shell; coordinate axes (the binding directions of the pointwise bounds)
    are appended at a geometric ladder of radii.
    """
    A = spectra.symmetrize(A)
    n = A.shape[0]
    frame = spectra.eigh(A)
    a, Q = frame.values, frame.vectors
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((count, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    radii = np.exp(rng.uniform(math.log(r_lo), math.log(r_hi), size=count))
    scale = np.sqrt(U * U @ a)
    Y = U * (radii / scale)[:, None]
    if include_axes:
        ladder = np.exp(np.linspace(math.log(r_lo), math.log(r_hi), 8))
        axes = []
        for i in range(n):
            for sgn in (1.0, -1.0):
                e = np.zeros(n)
                e[i] = sgn
                for rad in ladder:
                    axes.append(e * (rad / math.sqrt(a[i])))
        Y = np.vstack([Y, np.array(axes)])
    return Y @ Q
