"""Tail integral, the radial candidate, its Hessian, pointwise verification."""

import math

import numpy as np
import pytest
from helpers import balanced_spectrum, random_orthogonal

from hessquot.admissibility import c_star
from hessquot.errors import (
    DivergentTailError,
    InsideExcludedRegionError,
    NotAdmissibleError,
)
from hessquot.profile import ProfileSpec, asymptotic_constant
from hessquot.spectra import eigh
from hessquot.subsolution import (
    Ellipsoid,
    Subsolution,
    hessian_sigmas,
    mu,
    phi_eval,
    phi_gradient,
    phi_hessian,
    sample_shell_points,
    verify_subsolution,
)
from hessquot.symfunc import sigma

SPEC20 = ProfileSpec(k=2, l=0, xi_upper_k=2.0 / 3.0, xi_lower_l=0.0, beta=2.0)
CS = float(c_star(3, 2, 0))


def test_mu_flat_profile_vanishes():
    assert mu(2.0, 1.0, SPEC20) == 0.0
    assert np.array_equal(mu(np.array([1.0, 5.0]), 1.0, SPEC20), np.zeros(2))


def test_mu_lower_bound_and_monotone_in_beta():
    m = SPEC20.m
    for R in (1.0, 2.0, 10.0, 100.0):
        prev = 0.0
        for beta in (1.5, 2.0, 3.0, 5.0):
            val = float(mu(R, beta, SPEC20))
            low = (beta - 1.0) * R ** (2.0 - m) / (m - 2.0)
            assert val >= low * (1.0 - 1e-12)
            assert val > prev
            prev = val


def test_mu_against_brute_force_quadrature():
    # independent oracle: dense trapezoid on log-spaced nodes + power tail
    from hessquot.profile import solve_excess_many

    m, beta = SPEC20.m, SPEC20.beta
    R, far = 2.0, 1e7
    t = np.exp(np.linspace(math.log(R), math.log(far), 200_001))
    integrand = t * solve_excess_many(SPEC20, t)
    brute = float(np.trapezoid(integrand, t))
    brute += asymptotic_constant(SPEC20) * far ** (2.0 - m) / (m - 2.0)
    val = float(mu(R, beta, SPEC20))
    assert abs(val - brute) <= 2e-8 * brute


def test_mu_decay_slope():
    R = np.exp(np.linspace(math.log(1e2), math.log(1e4), 10))
    vals = np.array([float(mu(float(x), 2.0, SPEC20)) for x in R])
    slope = float(np.polyfit(np.log(R), np.log(vals), 1)[0])
    m = SPEC20.m
    assert abs(slope + (m - 2.0)) <= 0.01 * (m - 2.0)


def test_mu_rejects_divergent_exponent():
    slow = ProfileSpec(k=2, l=1, xi_upper_k=0.9, xi_lower_l=0.2, beta=2.0)
    assert slow.m < 2.0
    with pytest.raises(DivergentTailError):
        mu(2.0, 2.0, slow)


def test_ellipsoid_set():
    E = Ellipsoid(A=np.diag([1.0, 4.0, 1.0]), rho=2.0)
    assert E.radius(np.array([0.0, 1.0, 0.0])) == 2.0
    assert bool(E.contains(np.array([0.1, 0.0, 0.0])))
    assert not bool(E.contains(np.array([0.0, 2.0, 0.0])))


def _ball_sub(beta=2.0, gamma=1.5, alpha=0.0):
    return Subsolution(alpha=alpha, beta=beta, gamma=gamma,
                       A=CS * np.eye(3), k=2, l=0)


def test_phi_anchor_value():
    sub = _ball_sub(alpha=0.7)
    x = np.array([sub.gamma / math.sqrt(CS), 0.0, 0.0])   # radius exactly gamma
    assert abs(float(phi_eval(sub, x)) - 0.7) < 1e-12


def test_phi_flat_profile_is_quadratic():
    sub = _ball_sub(beta=1.0, alpha=0.3)
    x = np.array([2.0, -1.0, 0.5])
    r2 = CS * float(x @ x)
    expected = 0.3 + 0.5 * (r2 - sub.gamma**2)
    assert abs(float(phi_eval(sub, x)) - expected) < 1e-12


def test_phi_far_field_offset():
    # needs a steep exponent so a radius exists where the tail is below 1e-8
    # while q/2 still resolves to that accuracy in doubles: take m = 5
    cs5 = float(c_star(5, 3, 0))
    sub = Subsolution(alpha=0.4, beta=2.0, gamma=1.5,
                      A=cs5 * np.eye(5), k=3, l=0)
    from hessquot.spectra import quadratic_form

    x = np.zeros(5)
    x[0] = 2000.0 / math.sqrt(cs5)        # ellipsoidal radius 2000
    got = float(phi_eval(sub, x)) - 0.5 * float(quadratic_form(sub.A, x))
    assert abs(got - sub.offset) < 1e-8 * max(1.0, abs(sub.offset))


def test_phi_rejects_core_points():
    sub = _ball_sub(gamma=2.0)
    with pytest.raises(InsideExcludedRegionError):
        phi_eval(sub, np.array([0.1, 0.0, 0.0]))


def test_subsolution_requires_admissible():
    with pytest.raises(NotAdmissibleError):
        Subsolution(alpha=0.0, beta=2.0, gamma=1.0,
                    A=np.diag([1.0, 2.0, 3.0]), k=2, l=0)


def test_hessian_flat_profile_is_matrix():
    sub = _ball_sub(beta=1.0)
    x = np.array([3.0, 1.0, -2.0])
    H = phi_hessian(sub, x)
    assert np.max(np.abs(H - CS * np.eye(3))) < 1e-12


def test_hessian_matches_finite_differences():
    rng = np.random.default_rng(0)
    a = balanced_spectrum(rng, 3, 3, 1)
    Q = random_orthogonal(rng, 3)
    A = Q.T @ np.diag(a) @ Q
    sub = Subsolution(alpha=0.2, beta=2.5, gamma=1.2, A=A, k=3, l=1)
    x = sample_shell_points(A, 2.0, 8.0, 3, seed=1)[0]
    H = phi_hessian(sub, x)
    h = 1e-4
    n = 3
    fd = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            pp = x.copy(); pp[i] += h; pp[j] += h
            pm = x.copy(); pm[i] += h; pm[j] -= h
            mp = x.copy(); mp[i] -= h; mp[j] += h
            mm = x.copy(); mm[i] -= h; mm[j] -= h
            fd[i, j] = (
                float(phi_eval(sub, pp)) - float(phi_eval(sub, pm))
                - float(phi_eval(sub, mp)) + float(phi_eval(sub, mm))
            ) / (4 * h * h)
    assert np.max(np.abs(H - fd)) <= 1e-6 * max(1.0, float(np.max(np.abs(H))))


def test_gradient_matches_finite_differences():
    sub = _ball_sub()
    x = np.array([2.0, 1.0, 1.0])
    g = phi_gradient(sub, x)
    h = 1e-6
    for i in range(3):
        up = x.copy(); up[i] += h
        dn = x.copy(); dn[i] -= h
        fd = (float(phi_eval(sub, up)) - float(phi_eval(sub, dn))) / (2 * h)
        assert abs(g[i] - fd) <= 1e-6 * max(1.0, abs(fd))


def test_hessian_sigmas_match_eigenvalue_route():
    rng = np.random.default_rng(3)
    for (n, k, l) in [(3, 2, 0), (3, 3, 1), (4, 3, 1), (5, 4, 2)]:
        a = balanced_spectrum(rng, n, k, l)
        Q = random_orthogonal(rng, n)
        A = Q.T @ np.diag(a) @ Q
        sub = Subsolution(alpha=0.0, beta=2.0, gamma=1.1, A=A, k=k, l=l)
        pts = sample_shell_points(A, 1.2, 100.0, 20, seed=n)
        fast = hessian_sigmas(sub, pts)
        for idx in range(0, pts.shape[0], 5):
            H = phi_hessian(sub, pts[idx])
            vals = eigh(H).values
            for j in range(1, k + 1):
                oracle = float(sigma(j, vals.tolist()))
                assert abs(fast[idx, j - 1] - oracle) <= 1e-10 * max(1.0, abs(oracle))


def test_verify_subsolution_passes_and_decays():
    rng = np.random.default_rng(5)
    a = balanced_spectrum(rng, 3, 2, 1, spread=0.3)
    sub = Subsolution(alpha=0.0, beta=3.0, gamma=1.0, A=np.diag(a), k=2, l=1)
    pts = sample_shell_points(np.diag(a), 1.001, 1e3, 5000, seed=9)
    report = verify_subsolution(sub, pts)
    assert report.passed
    assert all(v > 0 for v in report.worst_margins.values())
    assert report.quotient_worst >= -1e-12
    # the margin collapses toward zero at the far end of the sample range
    assert report.quotient_at_max_radius < 1e-3


def test_verify_subsolution_flat_profile_equality():
    sub = _ball_sub(beta=1.0)
    pts = sample_shell_points(sub.A, 1.6, 50.0, 500, seed=2)
    report = verify_subsolution(sub, pts)
    assert report.passed
    # quadratic with balanced matrix: the quotient margin is numerically zero
    assert abs(report.quotient_worst) < 1e-12


def test_verify_subsolution_json_roundtrip():
    import json

    sub = _ball_sub()
    pts = sample_shell_points(sub.A, 1.6, 10.0, 100, seed=3)
    report = verify_subsolution(sub, pts)
    blob = json.dumps(report.to_dict())
    back = json.loads(blob)
    assert back["passed"] is True
    assert back["sample_count"] == report.sample_count


def test_sample_shell_points_radius_window():
    A = np.diag([1.0, 2.0, 4.0])
    pts = sample_shell_points(A, 2.0, 30.0, 200, seed=0)
    r = np.sqrt(np.einsum("ni,ij,nj->n", pts, A, pts))
    assert np.all(r >= 2.0 * (1 - 1e-12))
    assert np.all(r <= 30.0 * (1 + 1e-12))
