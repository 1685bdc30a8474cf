"""Command-line front end.

Subcommands: xi, psi, mu, subsolution, boundary, solve, verify.  Tables go
to stdout, diagnostics to stderr; report paths write CSV/JSON plus rendered
figures into --output-dir.  Exit codes: 0 success, 2 invalid input, 3
asymptotic constant below the computed threshold, 4 verification violation.
Identical arguments and seed produce byte-identical delimited output.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import boundary as bdry
from . import exterior as ext
from . import profile as profile_mod
from . import report as rpt
from . import subsolution as subsol
from . import verify as verify_mod
from .admissibility import classify, m_exponent, xi_bounds
from .errors import (
    CTooSmallError,
    DivergentTailError,
    HessquotError,
    NotAdmissibleError,
    NotPositiveConeError,
)
from .problems import ProblemFormatError, load_problem
from .profile import ProfileSpec
from .symfunc import SigmaTable

F = rpt.fmt

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_C_TOO_SMALL = 3
EXIT_VIOLATION = 4


def _parse_vector(text: str, exact: bool):
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if not parts:
        raise ValueError("empty vector")
    if exact:
        return [Fraction(p) for p in parts]
    return [float(Fraction(p)) for p in parts]


def _parse_grid(text: str) -> np.ndarray:
    try:
        start, stop, count = text.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise ValueError(f"grid must be START:STOP:COUNT, got {text!r}")
    if not (0 < start <= stop) or count < 1:
        raise ValueError(f"bad grid {text!r}")
    return np.exp(np.linspace(np.log(start), np.log(stop), count))


def _profile_spec_from_args(args, exact_ok: bool = False) -> ProfileSpec:
    if args.a is not None:
        a = _parse_vector(args.a, exact=False)
        return ProfileSpec.from_eigenvalues(args.k, args.l, a, args.beta)
    if args.xi_upper is None or args.xi_lower is None:
        raise ValueError("need either --a or both --xi-upper and --xi-lower")
    return ProfileSpec(
        k=args.k, l=args.l, xi_upper_k=args.xi_upper,
        xi_lower_l=args.xi_lower, beta=args.beta,
    )


# ---------------------------------------------------------------------------


def cmd_xi(args) -> int:
    a = _parse_vector(args.a, exact=args.exact)
    a_sorted = sorted(a)
    if any(v <= 0 for v in a_sorted):
        print("error: the spectrum must be strictly positive", file=sys.stderr)
        return EXIT_BAD_INPUT
    n = len(a_sorted)
    mode = "exact" if args.exact else "float"
    print(f"a = {' '.join(str(v) for v in a_sorted)}  (n = {n}, {mode})")
    print()
    print("j  xi_lower_j  xi_upper_j")
    bounds = {}
    for j in range(0, n + 1):
        lo, up = xi_bounds(j, a_sorted)
        bounds[j] = (lo, up)
        print(f"{j}  {lo if args.exact else F(lo)}  {up if args.exact else F(up)}")
    print()
    print("k  l  m_kl  exponent_above_2")
    pairs = []
    for k in range(1, n + 1):
        for l in range(0, k):
            if args.k is not None and k != args.k:
                continue
            if args.l is not None and l != args.l:
                continue
            m = m_exponent(k, l, a_sorted)
            pairs.append((k, l, m))
            flag = "yes" if m > 2 else "no"
            print(f"{k}  {l}  {m if args.exact else F(m)}  {flag}")
    if args.output_dir:
        out = Path(args.output_dir)
        rpt.write_json(out / "xi.json", {
            "a": [str(v) for v in a_sorted],
            "exact": bool(args.exact),
            "bounds": {str(j): [str(b[0]), str(b[1])] for j, b in bounds.items()},
            "exponents": [
                {"k": k, "l": l, "m": str(m), "above_2": bool(m > 2)}
                for k, l, m in pairs
            ],
        })
        rpt.write_csv(out / "xi.csv", ["k", "l", "m", "above_2"],
                      [[k, l, str(m), int(m > 2)] for k, l, m in pairs])
    return EXIT_OK


def cmd_psi(args) -> int:
    spec = _profile_spec_from_args(args)
    if args.require_admissible and spec.m <= 2.0:
        print(
            f"error: decay exponent m = {F(spec.m)} <= 2; admissible profiles "
            "require m > 2",
            file=sys.stderr,
        )
        return EXIT_BAD_INPUT
    r = _parse_grid(args.r_grid)
    delta = profile_mod.solve_excess_many(spec, r)
    psi_root = 1.0 + delta
    psi_ode = profile_mod.solve_ode_many(spec, r)
    diff = np.abs(psi_root - psi_ode)
    scaled = delta * r**spec.m
    limit = profile_mod.asymptotic_constant(spec)
    header = ["r", "psi_implicit", "psi_ode", "abs_diff", "scaled_excess",
              "amplitude_limit"]
    rows = [
        [r[i], psi_root[i], psi_ode[i], diff[i], scaled[i], limit]
        for i in range(len(r))
    ]
    print(
        f"profile: k={spec.k} l={spec.l} xi_upper={F(spec.xi_upper_k)} "
        f"xi_lower={F(spec.xi_lower_l)} m={F(spec.m)} beta={F(spec.beta)}"
    )
    print(",".join(header))
    for row in rows:
        print(",".join(F(v) for v in row))
    if args.output_dir:
        out = Path(args.output_dir)
        rpt.write_csv(out / "profile.csv", header, rows)
        if args.dat:
            rpt.write_dat(out / "profile.dat", header, rows)
        rpt.profile_figure(out / "profile.png", r, psi_root, delta, spec.m,
                           limit, spec.beta)
    lo_ok = np.all(scaled >= (spec.beta - 1.0) * (1.0 - 1e-12) - 1e-300)
    hi_ok = np.all(scaled <= limit * (1.0 + 1e-12) + 1e-300)
    if not (lo_ok and hi_ok):
        print("error: scaled excess violates its pinching bounds", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_mu(args) -> int:
    spec = _profile_spec_from_args(args)
    if spec.m <= 2.0:
        print(
            f"error: decay exponent m = {F(spec.m)} <= 2; the tail integral "
            "diverges (admissibility requires m > 2)",
            file=sys.stderr,
        )
        return EXIT_BAD_INPUT
    R = _parse_grid(args.r_grid)
    vals = np.array([float(subsol.mu(float(x), spec.beta, spec)) for x in R])
    lower = (spec.beta - 1.0) * R ** (2.0 - spec.m) / (spec.m - 2.0)
    scaled = vals * R ** (spec.m - 2.0)
    header = ["R", "mu", "lower_bound", "scaled"]
    rows = [[R[i], vals[i], lower[i], scaled[i]] for i in range(len(R))]
    print(f"tail integral: m={F(spec.m)} beta={F(spec.beta)}")
    print(",".join(header))
    for row in rows:
        print(",".join(F(v) for v in row))
    slope = (
        float(np.polyfit(np.log(R), np.log(vals), 1)[0])
        if len(R) > 2 and np.all(vals > 0)
        else float("nan")
    )
    print(f"fit_slope,{F(slope)},expected,{F(-(spec.m - 2.0))}", file=sys.stderr)
    if args.output_dir:
        out = Path(args.output_dir)
        rpt.write_csv(out / "tail.csv", header, rows)
        if args.dat:
            rpt.write_dat(out / "tail.dat", header, rows)
        rpt.tail_figure(out / "tail.png", R, vals, slope, -(spec.m - 2.0))
    if np.any(vals < lower * (1.0 - 1e-12)):
        print("error: tail integral dips below its lower bound", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_subsolution(args) -> int:
    a = np.sort(np.array(_parse_vector(args.a, exact=False)))
    if np.any(a <= 0):
        print("error: the spectrum must be strictly positive", file=sys.stderr)
        return EXIT_BAD_INPUT
    table = SigmaTable(a.tolist())
    sk, sl = table.sigma(args.k), table.sigma(args.l)
    if abs(sk - sl) > 1e-10 * max(sk, sl):
        rho = (sk / sl) ** (-1.0 / (args.k - args.l))
        print(f"note: rescaling spectrum by rho = {F(rho)} to balance "
              f"sigma_{args.k} = sigma_{args.l}", file=sys.stderr)
        a = rho * a
    m = float(m_exponent(args.k, args.l, a.tolist()))
    if m <= 2.0:
        print(
            f"error: decay exponent m = {F(m)} <= 2; the subsolution "
            "construction requires m > 2",
            file=sys.stderr,
        )
        return EXIT_BAD_INPUT
    sub = subsol.Subsolution(
        alpha=args.alpha, beta=args.beta, gamma=args.gamma,
        A=np.diag(a), k=args.k, l=args.l,
    )
    pts = subsol.sample_shell_points(
        sub.A, args.gamma * 1.001, args.r_max, args.samples, seed=args.seed
    )
    report = subsol.verify_subsolution(sub, pts)
    print(f"subsolution margins: k={args.k} l={args.l} m={F(m)} "
          f"beta={F(args.beta)} gamma={F(args.gamma)}")
    print(f"samples,{report.sample_count}")
    for name, val in report.worst_margins.items():
        print(f"worst_{name},{F(val)}")
    print(f"worst_quotient_margin,{F(report.quotient_worst)}")
    print(f"violations,{len(report.violations)}")
    if args.output_dir:
        out = Path(args.output_dir)
        rpt.write_json(out / "subsolution.json", report.to_dict())
        rows = sorted(
            zip(report.sample_radii, report.sample_quotient_margins),
            key=lambda t: t[0],
        )
        rpt.write_csv(out / "margins.csv", ["radius", "quotient_margin"], rows)
        rpt.margins_figure(out / "margins.png", [t[0] for t in rows],
                           [t[1] for t in rows])
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _load_and_classify(args):
    problem = load_problem(args.problem)
    record = classify(problem.A, problem.k, problem.l)
    record.require_strictly_admissible()
    return problem, record


def cmd_boundary(args) -> int:
    problem, record = _load_and_classify(args)
    reduced, frame = ext.reduce_to_diagonal(problem)
    normalized = ext.normalize_scale(reduced, frame, resolution=args.mesh,
                                     seed=args.seed)
    pspec = ProfileSpec.from_eigenvalues(
        problem.k, problem.l, np.diag(normalized.A).tolist(), 1.0
    )
    env, constants = bdry.envelope(
        normalized.domain, normalized.phi, normalized.A,
        resolution=args.mesh, seed=args.seed,
    )
    constants = bdry.beta_hat(env, constants, pspec, seed=args.seed + 1)
    print(f"boundary envelope: mesh={args.mesh} scale={F(frame.scale)}")
    for key, val in constants.to_dict().items():
        print(f"{key},{F(val) if isinstance(val, float) else val}")
    c_tilde_orig = frame.c_to_original(constants.c_tilde)
    print(f"c_tilde_original,{F(c_tilde_orig)}")
    if args.output_dir:
        out = Path(args.output_dir)
        data = constants.to_dict()
        data["c_tilde_original"] = c_tilde_orig
        data["scale"] = frame.scale
        rpt.write_json(out / "boundary.json", data)
        rows = [
            [i, env.shifts[i], env.margin_ratios[i],
             float(np.linalg.norm(env.x_bar[i]))]
            for i in range(env.x_bar.shape[0])
        ]
        rpt.write_csv(out / "envelope.csv",
                      ["member", "shift_t", "margin_ratio", "center_norm"], rows)
        rpt.envelope_figure(out / "envelope.png", env.shifts, env.margin_ratios)
    return EXIT_OK


def cmd_solve(args) -> int:
    problem, record = _load_and_classify(args)
    sandwich = ext.build_sandwich(
        problem, resolution=args.mesh, seed=args.seed,
        shell_count=args.shell_samples,
    )
    ordering = ext.ordering_check(sandwich, count=args.annulus_samples,
                                  seed=args.seed + 7)
    identity = ext.identity_check(sandwich, seed=args.seed + 8)
    spot = subsol.sample_shell_points(
        sandwich.problem.A, 1.06, 1e3, args.spot_samples, seed=args.seed + 9
    )
    spot_report = subsol.verify_subsolution(sandwich.sub, spot)
    decay = ext.decay_report(sandwich, samples_per_shell=args.shell_samples,
                             seed=args.seed + 10)

    checks = dict(sandwich.checks)
    checks.update(ordering)
    checks.update(identity)
    checks["radial_branch_margins_ok"] = spot_report.passed
    checks["decay_slope"] = decay.slope
    checks["decay_slope_rel_error"] = decay.slope_rel_error

    gates = {
        "boundary_match": checks["boundary_match"] <= ext.BOUNDARY_MATCH_TOL,
        "ordering": checks["ordering_ok"],
        "radial_gap_identity": checks["identity_worst"] <= ext.IDENTITY_TOL,
        "outer_shell_gap": checks["outer_shell_min_gap"] > 0.0,
        "radial_branch_margins": spot_report.passed,
        "envelope_member_quotient": checks["envelope_member_quotient_dev"] <= 1e-10,
    }

    print(
        f"solve: k={problem.k} l={problem.l} n={problem.n} "
        f"m={F(sandwich.m)} beta(c)={F(sandwich.beta_c)}"
    )
    print(f"c_original,{F(sandwich.frame.c_to_original(sandwich.c_norm))}")
    print(f"c_tilde_original,{F(sandwich.frame.c_to_original(sandwich.constants.c_tilde))}")
    for key in ("eta", "c_bar", "r_bar", "r_hat", "beta_hat", "c_tilde"):
        print(f"{key},{F(getattr(sandwich.constants, key))}")
    for key, val in checks.items():
        print(f"{key},{F(val) if isinstance(val, float) else val}")
    for name, ok in gates.items():
        print(f"gate_{name},{'PASS' if ok else 'FAIL'}")
    print(f"decay_slope,{F(decay.slope)},expected,{F(decay.expected_slope)}")

    if args.output_dir:
        out = Path(args.output_dir)
        rpt.write_json(out / "solution.json", {
            "k": problem.k, "l": problem.l, "n": problem.n,
            "spectrum": sandwich.sub.a.tolist(),
            "decay_exponent": sandwich.m,
            "beta_c": sandwich.beta_c,
            "scale": sandwich.frame.scale,
            "c_original": sandwich.frame.c_to_original(sandwich.c_norm),
            "c_tilde_original": sandwich.frame.c_to_original(
                sandwich.constants.c_tilde
            ),
            "constants": sandwich.constants.to_dict(),
            "checks": checks,
            "gates": {k: bool(v) for k, v in gates.items()},
        })
        rpt.write_json(out / "decay.json", decay.to_dict())
        rows = list(zip(decay.radii, decay.w, decay.scaled))
        rpt.write_csv(out / "decay.csv", ["r", "w", "scaled"], rows)
        if args.dat:
            rpt.write_dat(out / "decay.dat", ["r", "w", "scaled"], rows)
        rpt.write_json(out / "verification.json", spot_report.to_dict())
        rpt.decay_figure(out / "decay.png", decay.radii, decay.w, decay.slope,
                         decay.expected_slope)
        rows_m = sorted(
            zip(spot_report.sample_radii, spot_report.sample_quotient_margins),
            key=lambda t: t[0],
        )
        rpt.margins_figure(out / "margins.png", [t[0] for t in rows_m],
                           [t[1] for t in rows_m])

    return EXIT_OK if all(gates.values()) else EXIT_VIOLATION


def cmd_verify(args) -> int:
    names = args.check if args.check else None
    if names:
        for name in names:
            if name not in verify_mod.BATTERIES:
                print(
                    f"error: unknown check {name!r}; available: "
                    + ", ".join(verify_mod.BATTERIES),
                    file=sys.stderr,
                )
                return EXIT_BAD_INPUT
    selected = names or list(verify_mod.BATTERIES)
    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        futures = [
            pool.submit(
                verify_mod.run_batteries, [name], args.seed, args.trials,
                args.inject_failure,
            )
            for name in selected
        ]
        results = [f.result()[0] for f in futures]
    width = max(len(r.name) for r in results)
    failed = False
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}}  trials={r.trials}  {r.detail}")
        if not r.passed:
            failed = True
            print(f"      witness: {r.witness}", file=sys.stderr)
    if args.output_dir:
        rpt.write_json(Path(args.output_dir) / "verify.json",
                       [r.to_dict() for r in results])
    return EXIT_VIOLATION if failed else EXIT_OK


# ---------------------------------------------------------------------------


def _add_profile_args(p, with_beta=True):
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--a", type=str, default=None,
                   help="comma-separated positive spectrum")
    p.add_argument("--xi-upper", type=float, default=None)
    p.add_argument("--xi-lower", type=float, default=None)
    if with_beta:
        p.add_argument("--beta", type=float, default=2.0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hessquot",
        description=(
            "Constructive sub/supersolution toolkit for exterior Dirichlet "
            "problems of Hessian quotient equations"
        ),
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("xi", help="directional ratio bounds and decay exponents")
    p.add_argument("--a", type=str, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--l", type=int, default=None)
    p.add_argument("--exact", action="store_true",
                   help="exact rational arithmetic, print fractions")
    p.add_argument("--output-dir", type=str, default=None)
    p.set_defaults(fn=cmd_xi)

    p = sub.add_parser("psi", help="radial profile by two independent methods")
    _add_profile_args(p)
    p.add_argument("--r-grid", type=str, default="1:1000:40",
                   help="log grid START:STOP:COUNT")
    p.add_argument("--require-admissible", action="store_true")
    p.add_argument("--output-dir", type=str, default=None)
    p.add_argument("--dat", action="store_true", help="also write gnuplot .dat")
    p.set_defaults(fn=cmd_psi)

    p = sub.add_parser("mu", help="tail integral of the profile excess")
    _add_profile_args(p)
    p.add_argument("--r-grid", type=str, default="1:10000:25")
    p.add_argument("--output-dir", type=str, default=None)
    p.add_argument("--dat", action="store_true")
    p.set_defaults(fn=cmd_mu)

    p = sub.add_parser("subsolution",
                       help="pointwise margins of the radial subsolution")
    p.add_argument("--a", type=str, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--r-max", type=float, default=1e3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-dir", type=str, default=None)
    p.set_defaults(fn=cmd_subsolution)

    p = sub.add_parser("boundary", help="envelope constants for a problem file")
    p.add_argument("--problem", type=str, required=True)
    p.add_argument("--mesh", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-dir", type=str, default=None)
    p.set_defaults(fn=cmd_boundary)

    p = sub.add_parser("solve", help="build and verify the full sandwich")
    p.add_argument("--problem", type=str, required=True)
    p.add_argument("--mesh", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shell-samples", type=int, default=2000)
    p.add_argument("--annulus-samples", type=int, default=100_000)
    p.add_argument("--spot-samples", type=int, default=4000)
    p.add_argument("--output-dir", type=str, default=None)
    p.add_argument("--dat", action="store_true")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("verify", help="run the randomized verification batteries")
    p.add_argument("--check", action="append", default=None,
                   help="battery name (repeatable); default all")
    p.add_argument("--trials", type=int, default=None,
                   help="override trial count for the identity batteries")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap for independent batteries")
    p.add_argument("--inject-failure", action="store_true",
                   help="negative control: perturb one check to prove detection")
    p.add_argument("--output-dir", type=str, default=None)
    p.set_defaults(fn=cmd_verify)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CTooSmallError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"computed_c_tilde,{F(exc.c_tilde)}", file=sys.stderr)
        return EXIT_C_TOO_SMALL
    except (NotAdmissibleError, NotPositiveConeError, DivergentTailError,
            ProblemFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except HessquotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
