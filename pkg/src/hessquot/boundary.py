"""Strictly convex domains, boundary data, touching quadratics, the envelope.

Every admissible quadratic

    Q_xi(x) = (x - xbar)^T A (x - xbar)/2 - (xi - xbar)^T A (xi - xbar)/2 + phi(xi)

touches the boundary data phi at the boundary point xi from below; their
upper envelope Q(x) = sup_xi Q_xi(x) matches phi on the boundary and is the
inner member of the sandwich near the domain.  The center is searched along

    xbar(xi) = xi - A^{-1} (grad_T phi(xi) + t nu(xi)),

a geometric schedule in t >= 0: the tangential-gradient term makes Q_xi
match phi to first order along the boundary, and the A^{-1} nu term turns
strict convexity (nu . (x - xi) < -kappa |x - xi|^2 on the boundary) into a
quadratically negative margin once t is large.  All derived constants (eta,
c_bar, beta_hat, c_tilde) are mesh approximations stored with their
resolution; stability under refinement is what the tests demand.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy import stats
from scipy.stats import qmc

from .errors import (
    CTooSmallError,
    NoTouchingQuadraticError,
    NotPositiveConeError,
)
from .profile import ProfileSpec
from .spectra import eigh, quadratic_form, symmetrize
from .subsolution import mu

MARGIN_FLOOR = 1e-6          # required (phi - Q_xi) / d(x, xi)^2 on the mesh
T_SCHEDULE_CAP = 48          # shift schedule t = 2^j, j = 0..cap
BETA_HAT_CAP = 60            # doubling schedule cap for beta_hat
ROOT_RTOL = 1e-10            # |mu(beta(c)) - c| <= ROOT_RTOL * max(1, |c|)


# ----------------------------------------------------------------------------
# domains


def sphere_directions(n: int, count: int, seed: int = 0) -> np.ndarray:
    """count quasi-random unit directions (scrambled Sobol -> Gaussian map)."""
    m = max(3, math.ceil(math.log2(max(count, 2))))
    sob = qmc.Sobol(d=n, scramble=True, seed=seed)
    pts = sob.random_base2(m)[:count]
    g = stats.norm.ppf(np.clip(pts, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    return g / norms


class ConvexDomain(ABC):
    """Bounded strictly convex body, origin inside, star-shaped boundary map."""

    n: int
    kind: str

    @abstractmethod
    def boundary_point(self, U: np.ndarray) -> np.ndarray:
        """Boundary point along each unit direction (rows)."""

    @abstractmethod
    def outward_normal(self, X: np.ndarray) -> np.ndarray:
        """Outward unit normal at boundary points (rows)."""

    @abstractmethod
    def contains(self, X: np.ndarray) -> np.ndarray:
        """Strict interior test (rows)."""

    @abstractmethod
    def curvature_lower_bound(self) -> float:
        """Positive lower bound for the principal curvatures."""

    @abstractmethod
    def parameters(self) -> dict:
        """JSON-friendly parameter record."""


class Ball(ConvexDomain):
    kind = "ball"

    def __init__(self, n: int, radius: float):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.n = n
        self.radius = float(radius)

    def boundary_point(self, U):
        return self.radius * np.atleast_2d(U)

    def outward_normal(self, X):
        X = np.atleast_2d(X)
        return X / np.linalg.norm(X, axis=1, keepdims=True)

    def contains(self, X):
        X = np.atleast_2d(X)
        return np.linalg.norm(X, axis=1) < self.radius

    def curvature_lower_bound(self):
        return 1.0 / self.radius

    def parameters(self):
        return {"kind": self.kind, "radius": self.radius}


class Ellipsoid(ConvexDomain):
    kind = "ellipsoid"

    def __init__(self, semi_axes):
        s = np.asarray(semi_axes, dtype=float)
        if np.any(s <= 0):
            raise ValueError("semi-axes must be positive")
        self.n = s.size
        self.semi_axes = s

    def boundary_point(self, U):
        U = np.atleast_2d(U)
        t = 1.0 / np.sqrt(np.sum((U / self.semi_axes) ** 2, axis=1))
        return U * t[:, None]

    def outward_normal(self, X):
        X = np.atleast_2d(X)
        g = X / self.semi_axes**2
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def contains(self, X):
        X = np.atleast_2d(X)
        return np.sum((X / self.semi_axes) ** 2, axis=1) < 1.0

    def curvature_lower_bound(self):
        s = self.semi_axes
        return float(np.min(s) / np.max(s) ** 2)

    def parameters(self):
        return {"kind": self.kind, "semi_axes": self.semi_axes.tolist()}


class Superellipsoid(ConvexDomain):
    """Level set sum |x_i/s_i|^p = 1 with exponent p in (1, 2].

    Strictly convex with curvature bounded below; the bound is sampled at
    construction (stored with its mesh size) because no closed form is used.
    """

    kind = "superellipsoid"

    def __init__(self, semi_axes, exponent: float):
        s = np.asarray(semi_axes, dtype=float)
        if np.any(s <= 0):
            raise ValueError("semi-axes must be positive")
        if not (1.0 < exponent <= 2.0):
            raise ValueError("exponent must lie in (1, 2]")
        self.n = s.size
        self.semi_axes = s
        self.exponent = float(exponent)
        self._kappa = self._sample_curvature()

    def _level(self, X):
        return np.sum(np.abs(X / self.semi_axes) ** self.exponent, axis=1)

    def boundary_point(self, U):
        U = np.atleast_2d(U)
        t = self._level(U) ** (-1.0 / self.exponent)
        return U * t[:, None]

    def _gradient(self, X):
        p = self.exponent
        return p * np.sign(X) * np.abs(X / self.semi_axes) ** (p - 1.0) / self.semi_axes

    def outward_normal(self, X):
        X = np.atleast_2d(X)
        g = self._gradient(X)
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def contains(self, X):
        X = np.atleast_2d(X)
        return self._level(X) < 1.0

    def _sample_curvature(self) -> float:
        p = self.exponent
        dirs = sphere_directions(self.n, 256, seed=7)
        pts = self.boundary_point(dirs)
        worst = math.inf
        for x in pts:
            g = self._gradient(x[None, :])[0]
            gn = np.linalg.norm(g)
            with np.errstate(divide="ignore"):
                h = p * (p - 1.0) * np.abs(x) ** (p - 2.0) / self.semi_axes**p
            h = np.minimum(h, 1e12)
            H = np.diag(h)
            nu = g / gn
            P = np.eye(self.n) - np.outer(nu, nu)
            S = P @ (H / gn) @ P
            vals = np.sort(np.linalg.eigvalsh(S))
            worst = min(worst, float(vals[1]))  # skip the normal-direction zero
        if worst <= 0:
            raise ValueError("sampled curvature bound is not positive")
        return worst

    def curvature_lower_bound(self):
        return self._kappa

    def parameters(self):
        return {
            "kind": self.kind,
            "semi_axes": self.semi_axes.tolist(),
            "exponent": self.exponent,
        }


class TransformedDomain(ConvexDomain):
    """scale * Q * (base domain) for orthogonal Q."""

    kind = "transformed"

    def __init__(self, base: ConvexDomain, rotation: np.ndarray | None = None,
                 scale: float = 1.0):
        self.base = base
        self.n = base.n
        self.rotation = np.eye(self.n) if rotation is None else np.asarray(rotation, float)
        self.scale = float(scale)
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def boundary_point(self, U):
        U = np.atleast_2d(U)
        V = U @ self.rotation
        return self.scale * (self.base.boundary_point(V) @ self.rotation.T)

    def outward_normal(self, X):
        X = np.atleast_2d(X)
        Xb = (X @ self.rotation) / self.scale
        return self.base.outward_normal(Xb) @ self.rotation.T

    def contains(self, X):
        X = np.atleast_2d(X)
        return self.base.contains((X @ self.rotation) / self.scale)

    def curvature_lower_bound(self):
        return self.base.curvature_lower_bound() / self.scale

    def parameters(self):
        return {
            "kind": self.kind,
            "base": self.base.parameters(),
            "scale": self.scale,
        }


def make_domain(kind: str, n: int, **params) -> ConvexDomain:
    if kind == "ball":
        return Ball(n, params["radius"])
    if kind == "ellipsoid":
        return Ellipsoid(params["semi_axes"])
    if kind == "superellipsoid":
        return Superellipsoid(params["semi_axes"], params["exponent"])
    raise ValueError(f"unknown domain kind {kind!r}")


# ----------------------------------------------------------------------------
# boundary data


class BoundaryData(ABC):
    """C^2 boundary values with an ambient gradient (needed for touching)."""

    @abstractmethod
    def value(self, X: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def gradient(self, X: np.ndarray) -> np.ndarray: ...


class PolynomialData(BoundaryData):
    """sum_t coef_t * prod_i x_i^powers_t[i]."""

    def __init__(self, terms, n: int):
        self.n = n
        self.terms = [(float(c), tuple(int(p) for p in pw)) for c, pw in terms]
        for _, pw in self.terms:
            if len(pw) != n or any(p < 0 for p in pw):
                raise ValueError(f"bad power tuple {pw}")

    @classmethod
    def constant(cls, value: float, n: int) -> "PolynomialData":
        return cls([(value, (0,) * n)], n)

    def value(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.zeros(X.shape[0])
        for c, pw in self.terms:
            term = np.full(X.shape[0], c)
            for i, p in enumerate(pw):
                if p:
                    term = term * X[:, i] ** p
            out += term
        return out

    def gradient(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.zeros_like(X)
        for c, pw in self.terms:
            for i, p in enumerate(pw):
                if not p:
                    continue
                term = np.full(X.shape[0], c * p)
                for j, pj in enumerate(pw):
                    e = pj - 1 if j == i else pj
                    if e:
                        term = term * X[:, j] ** e
                out[:, i] += term
        return out


class AffineMappedData(BoundaryData):
    """scale * base(M x + d) + lin . x: closed under the frame reductions."""

    def __init__(self, base: BoundaryData, M: np.ndarray, d: np.ndarray,
                 lin: np.ndarray, scale: float = 1.0):
        self.base = base
        self.M = np.asarray(M, dtype=float)
        self.d = np.asarray(d, dtype=float)
        self.lin = np.asarray(lin, dtype=float)
        self.scale = float(scale)

    def value(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Z = X @ self.M.T + self.d
        return self.scale * self.base.value(Z) + X @ self.lin

    def gradient(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Z = X @ self.M.T + self.d
        return self.scale * (self.base.gradient(Z) @ self.M) + self.lin


# ----------------------------------------------------------------------------
# meshes


@dataclass(eq=False)
class BoundaryMesh:
    points: np.ndarray
    normals: np.ndarray
    values: np.ndarray
    resolution: int


def boundary_mesh(domain: ConvexDomain, phi: BoundaryData, resolution: int,
                  seed: int = 0) -> BoundaryMesh:
    """Quasi-uniform boundary sample; coordinate axes are always included."""
    dirs = sphere_directions(domain.n, resolution, seed=seed)
    axes = np.vstack([np.eye(domain.n), -np.eye(domain.n)])
    dirs = np.vstack([dirs, axes])
    pts = domain.boundary_point(dirs)
    return BoundaryMesh(
        points=pts,
        normals=domain.outward_normal(pts),
        values=phi.value(pts),
        resolution=resolution,
    )


def ellipsoid_shell_points(A: np.ndarray, rho: float, count: int,
                           seed: int = 0) -> np.ndarray:
    """count points on the shell {x : x^T A x = rho^2}, plus axis points."""
    A = symmetrize(A)
    frame = eigh(A)
    a, Q = frame.values, frame.vectors
    n = A.shape[0]
    U = sphere_directions(n, count, seed=seed)
    axes = np.vstack([np.eye(n), -np.eye(n)])
    U = np.vstack([U, axes])
    scale = np.sqrt(U * U @ a)
    Y = U * (rho / scale)[:, None]
    return Y @ Q


# ----------------------------------------------------------------------------
# touching quadratics and their envelope


@dataclass(frozen=True, eq=False)
class TouchingQuadratic:
    """One quadratic with Hessian A touching phi from below at xi."""

    xi: np.ndarray
    x_bar: np.ndarray
    A: np.ndarray
    value_at_xi: float
    shift_t: float
    min_margin_ratio: float       # realized min of (phi - Q_xi)/d^2 on the mesh

    def value(self, X: np.ndarray) -> np.ndarray | float:
        diff = np.atleast_2d(X) - self.x_bar
        vals = 0.5 * np.einsum("ni,ij,nj->n", diff, self.A, diff) + self.constant
        return vals if np.ndim(X) > 1 else float(vals[0])

    @property
    def constant(self) -> float:
        d = self.xi - self.x_bar
        return self.value_at_xi - 0.5 * float(d @ self.A @ d)


def _base_parts(xi, nu, G, phi_xi, A, targets, target_values):
    """Decompose Q_xi(x) - phi(x) = b0[i, x] + t_i * lin[i, x] for a chunk of xi."""
    diff = targets[None, :, :] - xi[:, None, :]          # (M, N, n)
    quad = 0.5 * np.einsum("mni,ij,mnj->mn", diff, A, diff)
    lin = np.einsum("mi,mni->mn", nu, diff)
    gterm = np.einsum("mi,mni->mn", G, diff)
    b0 = quad + gterm + (phi_xi[:, None] - target_values[None, :])
    d2 = np.sum(diff * diff, axis=2)
    return b0, lin, d2


def _touching_centers(
    mesh: BoundaryMesh,
    refined: BoundaryMesh,
    phi: BoundaryData,
    A: np.ndarray,
    margin_floor: float,
):
    """Vectorized shift search for every mesh point at once.

    Returns (x_bar (M,n), t (M,), margin ratios (M,)).
    """
    A = symmetrize(A)
    vals = eigh(A).values
    if np.any(vals <= 0.0):
        raise NotPositiveConeError("touching quadratics need positive definite A")

    xi_all = mesh.points
    nu_all = mesh.normals
    phi_all = mesh.values
    grads = phi.gradient(xi_all)
    G_all = grads - (np.sum(grads * nu_all, axis=1, keepdims=True)) * nu_all
    cho = sla.cho_factor(A)

    M = xi_all.shape[0]
    t_out = np.empty(M)
    ratio_out = np.empty(M)
    chunk = max(1, int(2_000_000 // max(1, refined.points.shape[0])))
    # constraints come from the union of both meshes; the refined pass below
    # is then a pure verification and the shifts vary continuously with the
    # mesh instead of jumping by doublings
    con_points = np.vstack([mesh.points, refined.points])
    con_values = np.concatenate([mesh.values, refined.values])

    for s in range(0, M, chunk):
        sl = slice(s, min(s + chunk, M))
        xi, nu, G, phi_xi = xi_all[sl], nu_all[sl], G_all[sl], phi_all[sl]

        b0, lin, d2 = _base_parts(xi, nu, G, phi_xi, A, con_points, con_values)
        self_mask = d2 < 1e-18

        # smallest shift with Q_xi <= phi - floor * d^2 on the constraint set
        with np.errstate(divide="ignore", invalid="ignore"):
            need = (b0 + margin_floor * d2) / (-lin)
        impossible = (~self_mask) & (lin >= 0.0) & (b0 + margin_floor * d2 > 0.0)
        if np.any(impossible):
            i, j = np.argwhere(impossible)[0]
            raise NoTouchingQuadraticError(
                f"boundary point {xi[i].tolist()} cannot push below the data at "
                f"{con_points[j].tolist()}; domain is not strictly convex "
                "enough or the mesh is too coarse"
            )
        need = np.where(self_mask | (lin >= 0.0), -np.inf, need)
        t_req = np.maximum(np.max(need, axis=1), 0.0)
        if np.any(t_req > 2.0**T_SCHEDULE_CAP):
            i = int(np.argmax(t_req))
            raise NoTouchingQuadraticError(
                f"shift schedule exhausted at boundary point {xi[i].tolist()}"
            )
        t = np.maximum(1.05 * t_req, 1.0)

        # verify on the refined mesh alone; the doubling schedule is a
        # safety net and does not engage for consistent data
        ref_rows = slice(mesh.points.shape[0], None)
        b0_ref = b0[:, ref_rows]
        lin_ref = lin[:, ref_rows]
        self_ref = self_mask[:, ref_rows]
        slack_ref = 1e-10 * (1.0 + np.abs(refined.values)[None, :])
        for _ in range(T_SCHEDULE_CAP):
            resid = b0_ref + t[:, None] * lin_ref
            ok = self_ref | (resid <= slack_ref)
            bad_rows = ~np.all(ok, axis=1)
            if not np.any(bad_rows):
                break
            t = np.where(bad_rows, 2.0 * t, t)
            if np.any(t > 2.0**T_SCHEDULE_CAP):
                i = int(np.argmax(t))
                raise NoTouchingQuadraticError(
                    f"shift schedule exhausted at boundary point {xi[i].tolist()};"
                    " refine the mesh or check convexity"
                )
        else:
            raise NoTouchingQuadraticError("shift schedule exhausted")

        resid = b0 + t[:, None] * lin
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(self_mask, np.inf, -resid / d2)
        t_out[sl] = t
        ratio_out[sl] = np.min(ratios, axis=1)

    shifts = G_all + t_out[:, None] * nu_all
    x_bar = xi_all - sla.cho_solve(cho, shifts.T).T
    return x_bar, t_out, ratio_out


def touching_quadratic(
    domain: ConvexDomain,
    phi: BoundaryData,
    A: np.ndarray,
    xi: np.ndarray,
    resolution: int = 256,
    seed: int = 0,
    margin_floor: float = MARGIN_FLOOR,
) -> TouchingQuadratic:
    """Find one touching quadratic at the boundary point xi."""
    xi = np.asarray(xi, dtype=float)
    base = boundary_mesh(domain, phi, resolution, seed=seed)
    refined = boundary_mesh(domain, phi, 2 * resolution, seed=seed + 1)
    # prepend xi so the search anchors on it; only row 0 is consumed
    mesh = BoundaryMesh(
        points=np.vstack([xi[None, :], base.points]),
        normals=np.vstack([domain.outward_normal(xi[None, :]), base.normals]),
        values=np.concatenate([phi.value(xi[None, :]), base.values]),
        resolution=resolution,
    )
    x_bar, t, ratio = _touching_centers(mesh, refined, phi, A, margin_floor)
    return TouchingQuadratic(
        xi=xi,
        x_bar=x_bar[0],
        A=symmetrize(A),
        value_at_xi=float(phi.value(xi[None, :])[0]),
        shift_t=float(t[0]),
        min_margin_ratio=float(ratio[0]),
    )


class Envelope:
    """Q(x) = max over mesh boundary points of their touching quadratics."""

    def __init__(self, A: np.ndarray, mesh: BoundaryMesh, x_bar: np.ndarray,
                 shifts: np.ndarray, margin_ratios: np.ndarray):
        self.A = symmetrize(A)
        self.mesh = mesh
        self.x_bar = x_bar
        self.shifts = shifts
        self.margin_ratios = margin_ratios
        d = mesh.points - x_bar
        self.constants = mesh.values - 0.5 * np.einsum("mi,ij,mj->m", d, self.A, d)
        self._qc = 0.5 * np.einsum("mi,ij,mj->m", x_bar, self.A, x_bar)
        self._Axc = x_bar @ self.A

    def member_values(self, X: np.ndarray) -> np.ndarray:
        """Q_xi(x) for every member xi: shape (N, M)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        qx = 0.5 * quadratic_form(self.A, X)
        cross = X @ self._Axc.T
        return qx[:, None] - cross + self._qc[None, :] + self.constants[None, :]

    def value(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(np.atleast_2d(X).shape[0])
        Xv = np.atleast_2d(np.asarray(X, dtype=float))
        chunk = max(1, int(2_000_000 // max(1, self.x_bar.shape[0])))
        for s in range(0, Xv.shape[0], chunk):
            out[s : s + chunk] = np.max(self.member_values(Xv[s : s + chunk]), axis=1)
        return out

    def min_member_value(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(np.atleast_2d(X).shape[0])
        Xv = np.atleast_2d(np.asarray(X, dtype=float))
        chunk = max(1, int(2_000_000 // max(1, self.x_bar.shape[0])))
        for s in range(0, Xv.shape[0], chunk):
            out[s : s + chunk] = np.min(self.member_values(Xv[s : s + chunk]), axis=1)
        return out


@dataclass(eq=False)
class EnvelopeConstants:
    """Mesh-approximated constants of the construction (with their resolution)."""

    eta: float
    c_bar: float
    r_bar: float
    r_hat: float
    resolution: int
    K_bound: float               # realized max |x_bar|
    boundary_match: float        # max |Q - phi| on the boundary mesh
    min_touch_margin: float      # min margin ratio across members
    beta_hat: float | None = None
    mu_beta_hat: float | None = None
    q_max_rhat: float | None = None
    c_tilde: float | None = None

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "c_bar": self.c_bar,
            "r_bar": self.r_bar,
            "r_hat": self.r_hat,
            "resolution": self.resolution,
            "K_bound": self.K_bound,
            "boundary_match": self.boundary_match,
            "min_touch_margin": self.min_touch_margin,
            "beta_hat": self.beta_hat,
            "mu_beta_hat": self.mu_beta_hat,
            "q_max_rhat": self.q_max_rhat,
            "c_tilde": self.c_tilde,
        }


def envelope(
    domain: ConvexDomain,
    phi: BoundaryData,
    A: np.ndarray,
    resolution: int = 512,
    seed: int = 0,
    margin_floor: float = MARGIN_FLOOR,
    annulus_levels: int = 7,
) -> tuple[Envelope, EnvelopeConstants]:
    """Build the envelope and the constants eta, c_bar, r_bar, r_hat.

    Requires the unit ellipsoid of A inside the domain (normalize upstream).
    eta is the infimum of all member quadratics over the closed region
    between the boundary and the r_bar shell, including both.
    """
    A = symmetrize(A)
    mesh = boundary_mesh(domain, phi, resolution, seed=seed)
    refined = boundary_mesh(domain, phi, 2 * resolution, seed=seed + 1)

    r_on_boundary = np.sqrt(quadratic_form(A, mesh.points))
    r_min, r_max = float(np.min(r_on_boundary)), float(np.max(r_on_boundary))
    if r_min <= 1.0:
        raise ValueError(
            f"unit ellipsoid not strictly inside the domain (min radius {r_min:.6g});"
            " rescale the problem first"
        )
    r_bar = 1.1 * r_max
    r_hat = 2.0 * r_max

    x_bar, shifts, ratios = _touching_centers(mesh, refined, phi, A, margin_floor)
    env = Envelope(A, mesh, x_bar, shifts, ratios)

    qvals = env.value(mesh.points)
    boundary_match = float(np.max(np.abs(qvals - mesh.values)))

    # annulus between the boundary and the r_bar shell, endpoints included
    shell = mesh.points * (r_bar / r_on_boundary)[:, None]
    levels = np.linspace(0.0, 1.0, annulus_levels)
    annulus = np.concatenate(
        [mesh.points + tau * (shell - mesh.points) for tau in levels], axis=0
    )
    eta = float(np.min(env.min_member_value(annulus)))

    member_on_boundary = env.member_values(mesh.points)   # (N, M)
    half_quad = 0.5 * quadratic_form(A, mesh.points)
    c_bar = float(np.max(member_on_boundary - half_quad[:, None]))

    constants = EnvelopeConstants(
        eta=eta,
        c_bar=c_bar,
        r_bar=r_bar,
        r_hat=r_hat,
        resolution=resolution,
        K_bound=float(np.max(np.linalg.norm(x_bar, axis=1))),
        boundary_match=boundary_match,
        min_touch_margin=float(np.min(ratios)),
    )
    return env, constants


# ----------------------------------------------------------------------------
# the beta scales


def radial_value(beta: float, r: float, constants: EnvelopeConstants,
                 spec: ProfileSpec) -> float:
    """Value of the radial subsolution with anchor (eta, r_bar) at radius r."""
    r_bar = constants.r_bar
    return (
        constants.eta
        + 0.5 * (r * r - r_bar * r_bar)
        + float(mu(r_bar, beta, spec))
        - float(mu(r, beta, spec))
    )


def mu_shifted(beta: float, constants: EnvelopeConstants, spec: ProfileSpec) -> float:
    """mu(beta) = eta - r_bar^2/2 + mu_{r_bar}(beta): the asymptotic offset."""
    return constants.eta - 0.5 * constants.r_bar**2 + float(mu(constants.r_bar, beta, spec))


def beta_hat(env: Envelope, constants: EnvelopeConstants, spec: ProfileSpec,
             shell_count: int = 2048, seed: int = 0) -> EnvelopeConstants:
    """Smallest doubling-schedule beta with the radial branch above Q on the
    r_hat shell; fills beta_hat, mu_beta_hat, q_max_rhat and c_tilde."""
    shell = ellipsoid_shell_points(env.A, constants.r_hat, shell_count, seed=seed)
    q_max = float(np.max(env.value(shell)))
    b = 2.0
    for _ in range(BETA_HAT_CAP):
        if radial_value(b, constants.r_hat, constants, spec) > q_max:
            break
        b *= 2.0
    else:
        raise RuntimeError("beta_hat doubling schedule exhausted (unexpected)")
    constants.beta_hat = b
    constants.mu_beta_hat = mu_shifted(b, constants, spec)
    constants.q_max_rhat = q_max
    constants.c_tilde = max(constants.eta, constants.mu_beta_hat, constants.c_bar)
    return constants


def beta_of_c(c: float, constants: EnvelopeConstants, spec: ProfileSpec) -> float:
    """The unique beta with mu(beta) = c, for c >= c_tilde.

    Monotone bisection with residual |mu(beta) - c| <= ROOT_RTOL * max(1,|c|);
    the result is >= beta_hat.
    """
    if constants.c_tilde is None:
        raise ValueError("constants incomplete: run beta_hat first")
    if c < constants.c_tilde:
        raise CTooSmallError(c, constants.c_tilde)

    # well below the 1e-10 radial-gap identity budget, floored by the
    # double-precision noise of the tail quadrature itself
    tol = max(0.25 * ROOT_RTOL, 1e-14 * abs(c))
    lo, hi = 1.0, max(2.0, constants.beta_hat or 2.0)
    for _ in range(200):
        if mu_shifted(hi, constants, spec) >= c:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise RuntimeError("beta bracket expansion failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = mu_shifted(mid, constants, spec)
        if abs(val - c) <= tol:
            assert mid >= (constants.beta_hat or 1.0) * (1.0 - 1e-6)
            return mid
        if val < c:
            lo = mid
        else:
            hi = mid
    raise RuntimeError("beta bisection did not meet the residual target")
