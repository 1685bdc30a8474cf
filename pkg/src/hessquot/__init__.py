"""Constructive sub/supersolution toolkit for exterior Dirichlet problems of
Hessian quotient equations: symmetric-function algebra, the radial profile
and its tail integral, boundary envelopes, and the assembled sandwich."""

from .admissibility import (
    AdmissibleMatrix,
    XiProfile,
    c_star,
    classify,
    m_exponent,
    xi_at,
    xi_bounds,
)
from .boundary import (
    Ball,
    BoundaryData,
    ConvexDomain,
    Ellipsoid,
    PolynomialData,
    Superellipsoid,
    beta_of_c,
    envelope,
    touching_quadratic,
)
from .exterior import (
    ExteriorProblemSpec,
    Sandwich,
    build_sandwich,
    comparison_check,
    decay_report,
    reduce_to_diagonal,
    verify_exact_ellipsoid_solution,
)
from .profile import (
    Profile,
    ProfileSpec,
    amplitude,
    asymptotic_constant,
    beta_sensitivity,
    psi_derivative,
    solve_implicit,
    solve_ode,
)
from .spectra import EigenDecomposition, conjugate_by, eigh
from .subsolution import (
    Ellipsoid as EllipsoidSet,
    Subsolution,
    mu,
    phi_eval,
    phi_hessian,
    verify_subsolution,
)
from .symfunc import (
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

__version__ = "0.1.0"
