"""Command-line behavior: tables, files, determinism, exit codes."""

import json
from pathlib import Path

import numpy as np
import pytest

from hessquot import cli

REPO = Path(__file__).resolve().parents[1]
BALL = str(REPO / "problems" / "ball_k2_l0.json")


def _xi_tables(out: str):
    bounds, exponents = {}, {}
    for line in out.splitlines():
        parts = line.split()
        if len(parts) == 3 and parts[0].isdigit():
            bounds[int(parts[0])] = (parts[1], parts[2])
        if len(parts) == 4 and parts[0].isdigit() and parts[1].isdigit():
            exponents[(int(parts[0]), int(parts[1]))] = (parts[2], parts[3])
    return bounds, exponents


def test_xi_exact_golden_123(capsys):
    assert cli.main(["xi", "--a", "1,2,3", "--exact"]) == 0
    bounds, exponents = _xi_tables(capsys.readouterr().out)
    assert bounds[2] == ("5/11", "9/11")
    assert bounds[1] == ("1/6", "1/2")
    assert exponents[(3, 1)] == ("12/5", "yes")
    assert exponents[(2, 1)] == ("66/43", "no")
    assert exponents[(2, 0)] == ("22/9", "yes")
    assert exponents[(1, 0)] == ("2", "no")
    assert exponents[(3, 2)] == ("11/6", "no")
    assert exponents[(3, 0)] == ("3", "yes")


def test_xi_exact_golden_111213(capsys):
    assert cli.main(["xi", "--a", "11,12,13", "--exact"]) == 0
    bounds, exponents = _xi_tables(capsys.readouterr().out)
    assert bounds[2] == ("275/431", "299/431")
    assert bounds[1] == ("11/36", "13/36")
    assert exponents[(3, 2)] == ("431/156", "yes")
    assert exponents[(3, 1)] == ("72/25", "yes")
    assert exponents[(2, 1)] == ("15516/6023", "yes")
    assert exponents[(2, 0)] == ("862/299", "yes")
    assert exponents[(1, 0)] == ("36/13", "yes")


def test_xi_isotropic(capsys):
    assert cli.main(["xi", "--a", "1,1,1", "--exact"]) == 0
    bounds, exponents = _xi_tables(capsys.readouterr().out)
    assert bounds[1] == ("1/3", "1/3")
    assert bounds[2] == ("2/3", "2/3")
    assert all(v[0] == "3" for v in exponents.values())


def test_xi_rejects_nonpositive(capsys):
    assert cli.main(["xi", "--a", "1,-2,3", "--exact"]) == 2


def test_xi_writes_reports(tmp_path, capsys):
    assert cli.main(["xi", "--a", "1,2,3", "--exact",
                     "--output-dir", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "xi.json").read_text())
    assert data["exact"] is True
    assert (tmp_path / "xi.csv").exists()


def test_psi_flat_profile_constant(tmp_path, capsys):
    rc = cli.main([
        "psi", "--k", "2", "--l", "0", "--a", "0.578,0.578,0.578",
        "--beta", "1", "--r-grid", "1:100:8", "--output-dir", str(tmp_path),
    ])
    assert rc == 0
    out = capsys.readouterr().out
    rows = [l.split(",") for l in out.splitlines() if l and l[0].isdigit()]
    assert all(row[1] == "1" and row[2] == "1" for row in rows)
    assert (tmp_path / "profile.csv").exists()
    assert (tmp_path / "profile.png").exists()


def test_psi_requires_admissible_gate(capsys):
    rc = cli.main(["psi", "--k", "2", "--l", "1", "--a", "1,2,3",
                   "--beta", "2", "--require-admissible"])
    assert rc == 2
    assert "m > 2" in capsys.readouterr().err


def test_psi_deterministic_csv(tmp_path):
    args = ["psi", "--k", "3", "--l", "1", "--a", "1,1.3,2.2", "--beta", "2.5",
            "--r-grid", "1:1000:25"]
    assert cli.main(args + ["--output-dir", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--output-dir", str(tmp_path / "b")]) == 0
    b1 = (tmp_path / "a" / "profile.csv").read_bytes()
    b2 = (tmp_path / "b" / "profile.csv").read_bytes()
    assert b1 == b2


def test_mu_table_and_gate(tmp_path, capsys):
    rc = cli.main(["mu", "--k", "2", "--l", "0", "--a", "0.578,0.578,0.578",
                   "--beta", "2", "--r-grid", "1:1000:10",
                   "--output-dir", str(tmp_path), "--dat"])
    assert rc == 0
    assert (tmp_path / "tail.csv").exists()
    assert (tmp_path / "tail.dat").exists()
    assert (tmp_path / "tail.png").exists()
    capsys.readouterr()
    rc = cli.main(["mu", "--k", "2", "--l", "1", "--a", "1,2,3", "--beta", "2"])
    assert rc == 2
    assert "m > 2" in capsys.readouterr().err


def test_subsolution_command(tmp_path, capsys):
    rc = cli.main(["subsolution", "--a", "1,1.1,1.3", "--k", "2", "--l", "0",
                   "--beta", "2", "--gamma", "1.2", "--samples", "500",
                   "--seed", "3", "--output-dir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "violations,0" in out
    report = json.loads((tmp_path / "subsolution.json").read_text())
    assert report["passed"] is True
    assert (tmp_path / "margins.csv").exists()
    assert (tmp_path / "margins.png").exists()


def test_subsolution_rejects_low_exponent(capsys):
    rc = cli.main(["subsolution", "--a", "1,2,3", "--k", "2", "--l", "1"])
    assert rc == 2
    assert "m > 2" in capsys.readouterr().err


def test_boundary_command(tmp_path, capsys):
    rc = cli.main(["boundary", "--problem", BALL, "--mesh", "96",
                   "--output-dir", str(tmp_path)])
    assert rc == 0
    data = json.loads((tmp_path / "boundary.json").read_text())
    assert data["c_tilde"] is not None
    assert (tmp_path / "envelope.csv").exists()
    assert (tmp_path / "envelope.png").exists()


def test_solve_golden_and_artifacts(tmp_path, capsys):
    rc = cli.main(["solve", "--problem", BALL, "--mesh", "128",
                   "--shell-samples", "256", "--annulus-samples", "5000",
                   "--spot-samples", "500", "--output-dir", str(tmp_path)])
    assert rc == 0
    sol = json.loads((tmp_path / "solution.json").read_text())
    assert all(sol["gates"].values())
    decay = json.loads((tmp_path / "decay.json").read_text())
    assert abs(decay["slope"] - decay["expected_slope"]) <= 0.01
    for name in ("decay.csv", "decay.png", "margins.png", "verification.json"):
        assert (tmp_path / name).exists()


def test_solve_deterministic_output(tmp_path):
    args = ["solve", "--problem", BALL, "--mesh", "96", "--shell-samples",
            "128", "--annulus-samples", "2000", "--spot-samples", "200",
            "--seed", "5"]
    assert cli.main(args + ["--output-dir", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--output-dir", str(tmp_path / "b")]) == 0
    for name in ("solution.json", "decay.csv", "decay.json"):
        assert (tmp_path / "a" / name).read_bytes() == (
            tmp_path / "b" / name
        ).read_bytes()


def test_solve_c_too_small_exit_3(tmp_path, capsys):
    data = json.loads(Path(BALL).read_text())
    data["c"] = 0.25
    low = tmp_path / "low.json"
    low.write_text(json.dumps(data))
    rc = cli.main(["solve", "--problem", str(low), "--mesh", "96"])
    assert rc == 3
    err = capsys.readouterr().err
    assert "computed_c_tilde" in err


def test_solve_non_admissible_exit_2(tmp_path, capsys):
    data = json.loads(Path(BALL).read_text())
    rho = 6.0 / 11.0
    data.update(k=2, l=1, A=[[rho, 0, 0], [0, 2 * rho, 0], [0, 0, 3 * rho]])
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    rc = cli.main(["solve", "--problem", str(bad), "--mesh", "96"])
    assert rc == 2
    assert "m > 2" in capsys.readouterr().err


def test_verify_subset_and_report(tmp_path, capsys):
    rc = cli.main(["verify", "--check", "rank-one-sigma", "--check",
                   "newton-inequality", "--trials", "50",
                   "--output-dir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 2
    results = json.loads((tmp_path / "verify.json").read_text())
    assert len(results) == 2


def test_verify_unknown_check(capsys):
    assert cli.main(["verify", "--check", "nope"]) == 2


def test_verify_injected_failure(capsys):
    rc = cli.main(["verify", "--check", "rank-one-sigma", "--trials", "50",
                   "--inject-failure"])
    assert rc == 4
    captured = capsys.readouterr()
    assert "FAIL" in captured.out
    assert "witness" in captured.err
