"""Domains, boundary data, touching quadratics, envelope, beta scales."""

import math

import numpy as np
import pytest

from hessquot.admissibility import c_star
from hessquot.boundary import (
    AffineMappedData,
    Ball,
    Ellipsoid,
    PolynomialData,
    Superellipsoid,
    TransformedDomain,
    beta_hat,
    beta_of_c,
    boundary_mesh,
    ellipsoid_shell_points,
    envelope,
    mu_shifted,
    radial_value,
    sphere_directions,
    touching_quadratic,
)
from hessquot.errors import CTooSmallError, NoTouchingQuadraticError
from hessquot.profile import ProfileSpec
from hessquot.spectra import quadratic_form
from hessquot.subsolution import mu


def test_sphere_directions_unit_norm_and_deterministic():
    u1 = sphere_directions(3, 100, seed=0)
    u2 = sphere_directions(3, 100, seed=0)
    assert np.array_equal(u1, u2)
    assert np.max(np.abs(np.linalg.norm(u1, axis=1) - 1.0)) < 1e-14


def test_domain_geometry_ball():
    d = Ball(3, 2.0)
    u = sphere_directions(3, 50, seed=1)
    x = d.boundary_point(u)
    assert np.max(np.abs(np.linalg.norm(x, axis=1) - 2.0)) < 1e-12
    nu = d.outward_normal(x)
    assert np.max(np.abs(nu - x / 2.0)) < 1e-12
    assert d.curvature_lower_bound() == 0.5


def test_domain_geometry_ellipsoid():
    d = Ellipsoid([2.0, 1.0, 1.5])
    u = sphere_directions(3, 50, seed=2)
    x = d.boundary_point(u)
    level = np.sum((x / np.array([2.0, 1.0, 1.5])) ** 2, axis=1)
    assert np.max(np.abs(level - 1.0)) < 1e-12
    # normal is parallel to the level-set gradient
    nu = d.outward_normal(x)
    g = x / np.array([2.0, 1.0, 1.5]) ** 2
    cross = np.linalg.norm(np.cross(nu, g / np.linalg.norm(g, axis=1, keepdims=True)), axis=1)
    assert np.max(cross) < 1e-12
    assert d.curvature_lower_bound() == 1.0 / 4.0


def test_domain_geometry_superellipsoid():
    d = Superellipsoid([1.5, 1.2, 1.0], 1.8)
    u = sphere_directions(3, 50, seed=3)
    x = d.boundary_point(u)
    level = np.sum(np.abs(x / np.array([1.5, 1.2, 1.0])) ** 1.8, axis=1)
    assert np.max(np.abs(level - 1.0)) < 1e-12
    assert d.curvature_lower_bound() > 0.0
    with pytest.raises(ValueError):
        Superellipsoid([1.0, 1.0, 1.0], 2.5)


def test_transformed_domain_consistency():
    rng = np.random.default_rng(4)
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    base = Ellipsoid([2.0, 1.0, 1.5])
    d = TransformedDomain(base, rotation=Q, scale=1.7)
    u = sphere_directions(3, 30, seed=5)
    x = d.boundary_point(u)
    back = (x @ Q) / 1.7
    level = np.sum((back / np.array([2.0, 1.0, 1.5])) ** 2, axis=1)
    assert np.max(np.abs(level - 1.0)) < 1e-12
    assert np.all(~d.contains(x * 1.001))
    assert np.all(d.contains(x * 0.99))


def test_polynomial_data_value_and_gradient():
    phi = PolynomialData([(2.0, (1, 0, 2)), (-1.0, (0, 3, 0))], 3)
    x = np.array([[1.0, 2.0, 3.0]])
    assert phi.value(x)[0] == 2.0 * 1 * 9 - 8.0
    g = phi.gradient(x)[0]
    assert np.allclose(g, [18.0, -12.0, 12.0])


def test_affine_mapped_data_chain_rule():
    rng = np.random.default_rng(6)
    base = PolynomialData([(1.5, (2, 1, 0)), (0.5, (0, 0, 1))], 3)
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    lin = rng.standard_normal(3)
    d0 = rng.standard_normal(3)
    data = AffineMappedData(base, M=Q, d=d0, lin=lin, scale=1.3)
    x = rng.standard_normal((5, 3))
    vals = data.value(x)
    expected = 1.3 * base.value(x @ Q.T + d0) + x @ lin
    assert np.max(np.abs(vals - expected)) < 1e-12
    # gradient against finite differences
    g = data.gradient(x)
    h = 1e-6
    for i in range(3):
        xp = x.copy(); xp[:, i] += h
        xm = x.copy(); xm[:, i] -= h
        fd = (data.value(xp) - data.value(xm)) / (2 * h)
        assert np.max(np.abs(g[:, i] - fd)) < 1e-6


def test_touching_quadratic_ball_hand_geometry():
    # unit ball, zero data, identity matrix, center on the inward normal ray:
    # Q(x) = (|x|^2 - 1)/2 + (1 - t)(1 - xi.x), negative on the sphere off xi
    # once t > 1
    d = Ball(3, 1.0)
    phi = PolynomialData.constant(0.0, 3)
    xi = np.array([0.0, 0.0, 1.0])
    tq = touching_quadratic(d, phi, np.eye(3), xi, resolution=128, seed=0)
    assert abs(tq.value(xi[None, :])[0] - 0.0) < 1e-14
    t = tq.shift_t
    assert t > 1.0
    # center sits on the inward normal ray
    assert np.allclose(tq.x_bar, xi * (1.0 - t), atol=1e-12)
    pts = d.boundary_point(sphere_directions(3, 500, seed=7))
    vals = tq.value(pts)
    hand = 0.5 * (np.sum(pts * pts, axis=1) - 1.0) + (1.0 - t) * (1.0 - pts @ xi)
    assert np.max(np.abs(vals - hand)) < 1e-12
    off_xi = np.linalg.norm(pts - xi, axis=1) > 1e-6
    assert np.all(vals[off_xi] < 0.0)


def test_touching_quadratic_linear_data():
    # data that restricts a linear function: still touches from below
    d = Ball(3, 1.0)
    phi = PolynomialData([(0.3, (1, 0, 0)), (-0.2, (0, 0, 1))], 3)
    xi = d.boundary_point(np.array([[0.6, 0.8, 0.0]]))[0]
    tq = touching_quadratic(d, phi, np.eye(3), xi, resolution=128, seed=0)
    pts = d.boundary_point(sphere_directions(3, 800, seed=8))
    vals = tq.value(pts)
    data = phi.value(pts)
    off_xi = np.linalg.norm(pts - xi, axis=1) > 1e-6
    assert np.all(vals[off_xi] < data[off_xi])
    assert abs(tq.value(xi[None, :])[0] - phi.value(xi[None, :])[0]) < 1e-12
    assert tq.min_margin_ratio > 0.0


def test_touching_quadratic_schedule_exhaustion():
    d = Ball(3, 1.0)
    phi = PolynomialData.constant(0.0, 3)
    xi = np.array([0.0, 0.0, 1.0])
    with pytest.raises(NoTouchingQuadraticError):
        touching_quadratic(d, phi, np.eye(3), xi, resolution=64, seed=0,
                           margin_floor=1e30)


CS = float(c_star(3, 2, 0))


def _ball_setup(resolution=192, radius=1.5, const=0.25):
    domain = Ball(3, radius)
    phi = PolynomialData.constant(const, 3)
    A = CS * np.eye(3)
    env, constants = envelope(domain, phi, A, resolution=resolution, seed=0)
    return domain, phi, A, env, constants


def test_envelope_matches_data_on_boundary():
    _, _, _, env, constants = _ball_setup()
    assert constants.boundary_match < 1e-12
    mesh = env.mesh
    qvals = env.value(mesh.points)
    assert np.max(np.abs(qvals - mesh.values)) < 1e-12


def test_envelope_members_below_data_and_c_bar():
    _, phi, A, env, constants = _ball_setup()
    mesh = env.mesh
    members = env.member_values(mesh.points)
    assert np.all(members <= mesh.values[:, None] + 1e-9)
    half = 0.5 * quadratic_form(A, mesh.points)
    assert np.all(members - half[:, None] <= constants.c_bar + 1e-12)


def test_envelope_eta_below_all_members_on_annulus():
    domain, _, A, env, constants = _ball_setup()
    # eta is a lower bound for every member on the closed annulus
    r_on = np.sqrt(quadratic_form(A, env.mesh.points))
    shell = env.mesh.points * (constants.r_bar / r_on)[:, None]
    mid = 0.5 * (env.mesh.points + shell)
    for pts in (env.mesh.points, mid, shell):
        assert np.all(env.min_member_value(pts) >= constants.eta - 1e-12)


def test_envelope_requires_normalized_interior():
    domain = Ball(3, 1.0)              # unit ellipsoid of A not inside
    phi = PolynomialData.constant(0.0, 3)
    with pytest.raises(ValueError, match="rescale"):
        envelope(domain, phi, CS * np.eye(3), resolution=64, seed=0)


def test_beta_hat_clears_envelope_and_is_monotone():
    _, _, A, env, constants = _ball_setup()
    pspec = ProfileSpec.from_eigenvalues(2, 0, [CS, CS, CS], 1.0)
    constants = beta_hat(env, constants, pspec, shell_count=256, seed=1)
    shell = ellipsoid_shell_points(A, constants.r_hat, 256, seed=1)
    qmax = float(np.max(env.value(shell)))
    val = radial_value(constants.beta_hat, constants.r_hat, constants, pspec)
    assert val > qmax
    # any larger beta keeps the gap
    val2 = radial_value(2 * constants.beta_hat, constants.r_hat, constants, pspec)
    assert val2 > val
    assert constants.c_tilde == max(constants.eta, constants.mu_beta_hat,
                                    constants.c_bar)


def test_beta_of_c_residual_and_monotonicity():
    _, _, A, env, constants = _ball_setup()
    pspec = ProfileSpec.from_eigenvalues(2, 0, [CS, CS, CS], 1.0)
    constants = beta_hat(env, constants, pspec, shell_count=256, seed=1)
    c1 = constants.c_tilde + 0.5
    c2 = constants.c_tilde + 3.0
    b1 = beta_of_c(c1, constants, pspec)
    b2 = beta_of_c(c2, constants, pspec)
    assert b2 > b1 >= constants.beta_hat * (1 - 1e-9)
    for c, b in ((c1, b1), (c2, b2)):
        assert abs(mu_shifted(b, constants, pspec) - c) <= 1e-10 * max(1.0, abs(c))
    # below the threshold the hypothesis gate fires
    with pytest.raises(CTooSmallError):
        beta_of_c(constants.c_tilde - 0.1, constants, pspec)
    # mu at beta = 1 sits strictly below eta (root existence)
    assert mu_shifted(1.0, constants, pspec) < constants.eta


def test_envelope_constants_stable_under_refinement():
    _, _, A, env1, c1 = _ball_setup(resolution=192)
    _, _, _, env2, c2 = _ball_setup(resolution=384)
    for name in ("eta", "c_bar"):
        v1, v2 = getattr(c1, name), getattr(c2, name)
        assert abs(v1 - v2) <= 0.01 * max(1.0, abs(v1), abs(v2))


def test_ellipsoid_shell_points_on_shell():
    A = np.diag([1.0, 2.0, 5.0])
    pts = ellipsoid_shell_points(A, 3.0, 128, seed=0)
    r = np.sqrt(quadratic_form(A, pts))
    assert np.max(np.abs(r - 3.0)) < 1e-12


def test_boundary_mesh_includes_axes():
    domain = Ball(3, 2.0)
    phi = PolynomialData.constant(0.0, 3)
    mesh = boundary_mesh(domain, phi, 32, seed=0)
    for i in range(3):
        e = np.zeros(3)
        e[i] = 2.0
        present = np.min(np.linalg.norm(mesh.points - e, axis=1)) < 1e-12
        assert present


def test_radial_value_consistent_with_tail():
    _, _, A, env, constants = _ball_setup()
    pspec = ProfileSpec.from_eigenvalues(2, 0, [CS, CS, CS], 1.0)
    beta = 3.0
    r = constants.r_hat
    direct = (
        constants.eta
        + 0.5 * (r**2 - constants.r_bar**2)
        + float(mu(constants.r_bar, beta, pspec))
        - float(mu(r, beta, pspec))
    )
    assert abs(radial_value(beta, r, constants, pspec) - direct) < 1e-14
