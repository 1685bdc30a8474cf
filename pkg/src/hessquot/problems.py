"""JSON problem files: schema validation and construction of problem specs.

Schema (all keys top-level):

    {
      "n": 3,                      # dimension, >= 3
      "k": 2, "l": 0,              # quotient orders, 0 <= l < k <= n
      "domain": {                  # bounded strictly convex body
        "kind": "ball",            # ball | ellipsoid | superellipsoid
        "radius": 1.0,             # ball
        "semi_axes": [..],         # ellipsoid / superellipsoid
        "exponent": 1.8,           # superellipsoid, in (1, 2]
        "center": [..]             # optional translation, default origin
      },
      "A": [[..], ..],             # symmetric n x n with positive spectrum
      "b": [..],                   # linear drift, default zero
      "c": 25.0,                   # asymptotic constant
      "phi": {"constant": 0.0}     # or {"terms": [{"coef": ..,
                                   #                "powers": [e1..en]}, ..]}
    }

phi is a polynomial in the ambient coordinates restricted to the boundary.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .boundary import BoundaryData, PolynomialData, make_domain
from .exterior import ExteriorProblemSpec


class ProblemFormatError(ValueError):
    """The problem file violates the documented schema."""


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ProblemFormatError(message)


def parse_phi(data: dict, n: int) -> BoundaryData:
    _require(isinstance(data, dict), "phi must be an object")
    if "constant" in data:
        return PolynomialData.constant(float(data["constant"]), n)
    _require("terms" in data, "phi needs either 'constant' or 'terms'")
    terms = []
    for t in data["terms"]:
        _require(
            isinstance(t, dict) and "coef" in t and "powers" in t,
            "each phi term needs 'coef' and 'powers'",
        )
        powers = t["powers"]
        _require(
            len(powers) == n and all(int(p) >= 0 for p in powers),
            f"phi term powers must be {n} nonnegative integers",
        )
        terms.append((float(t["coef"]), tuple(int(p) for p in powers)))
    return PolynomialData(terms, n)


def problem_from_dict(data: dict) -> ExteriorProblemSpec:
    _require(isinstance(data, dict), "problem file must hold a JSON object")
    for key in ("n", "k", "l", "domain", "A", "c", "phi"):
        _require(key in data, f"missing required key {key!r}")
    n = int(data["n"])
    _require(n >= 3, "n must be >= 3")
    k, l = int(data["k"]), int(data["l"])
    _require(0 <= l < k <= n, f"need 0 <= l < k <= n, got k={k}, l={l}, n={n}")

    dom = dict(data["domain"])
    _require("kind" in dom, "domain needs a 'kind'")
    center = np.asarray(dom.pop("center", [0.0] * n), dtype=float)
    _require(center.shape == (n,), "domain center must have length n")
    kind = dom.pop("kind")
    try:
        domain = make_domain(kind, n, **dom)
    except (TypeError, KeyError) as exc:
        raise ProblemFormatError(f"bad domain parameters for kind {kind!r}: {exc}")
    _require(domain.n == n, "domain dimension does not match n")

    A = np.asarray(data["A"], dtype=float)
    _require(A.shape == (n, n), f"A must be {n}x{n}")
    _require(
        bool(np.max(np.abs(A - A.T)) <= 1e-12 * max(1.0, float(np.max(np.abs(A))))),
        "A must be symmetric",
    )
    b = np.asarray(data.get("b", [0.0] * n), dtype=float)
    _require(b.shape == (n,), "b must have length n")

    return ExteriorProblemSpec(
        domain=domain,
        phi=parse_phi(data["phi"], n),
        A=A,
        b=b,
        c=float(data["c"]),
        k=k,
        l=l,
        domain_center=center,
    )


def load_problem(path: str | Path) -> ExteriorProblemSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(f"invalid JSON in {path}: {exc}")
    return problem_from_dict(data)
