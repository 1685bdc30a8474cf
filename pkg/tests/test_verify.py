"""The battery runner: registry, determinism, witness reporting."""

import pytest

from hessquot import verify


def test_registry_names_are_stable():
    expected = {
        "sigma-recursion", "sigma-weighted-sum", "newton-inequality",
        "cone-nesting", "ellipticity-gap", "rank-one-sigma",
        "direction-ratio-bounds", "exponent-range", "profile-dual-method",
        "profile-bounds", "beta-sensitivity", "tail-integral",
        "hessian-assembly", "subsolution-margins", "touching-envelope",
        "sandwich-ordering",
    }
    assert set(verify.BATTERIES) == expected


def test_run_batteries_deterministic():
    names = ["sigma-recursion", "rank-one-sigma"]
    r1 = verify.run_batteries(names, seed=3, trials=40)
    r2 = verify.run_batteries(names, seed=3, trials=40)
    assert [x.to_dict() for x in r1] == [x.to_dict() for x in r2]
    assert all(x.passed for x in r1)


def test_run_batteries_unknown_name():
    with pytest.raises(KeyError):
        verify.run_batteries(["no-such-check"], seed=0)


def test_injected_failure_produces_witness():
    (result,) = verify.run_batteries(["rank-one-sigma"], seed=0, trials=30,
                                     inject_failure=True)
    assert not result.passed
    assert result.witness and "formula" in result.witness
