"""Command-line interface: subcommands, JSON payloads, exit codes."""

import json
import math

import pytest

from exppoly import cli
from exppoly.domain import ThetaUni
from exppoly.oracle import sample_uni

SQRT_PI = math.sqrt(math.pi)


def run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    payload = json.loads(captured.out) if captured.out.strip() else None
    return code, payload, captured.err


def write_sample(tmp_path, values, name="sample.csv"):
    path = tmp_path / name
    path.write_text("".join(f"{float(v)!r}\n" for v in values))
    return str(path)


def test_normconst_half_gaussian(capsys):
    code, out, _ = run(capsys, ["normconst", "--theta", "0,-1"])
    assert code == 0
    assert out["A"] == pytest.approx(SQRT_PI / 2, rel=1e-9)
    assert out["derivs"][1] == pytest.approx(0.5, rel=1e-9)
    assert out["engine_error_estimate"] < 1e-8


def test_normconst_realline(capsys):
    code, out, _ = run(
        capsys, ["normconst", "--mode", "realline", "--theta", "1,-1"]
    )
    assert code == 0
    assert out["A"] == pytest.approx(SQRT_PI * math.exp(0.25), rel=1e-9)


def test_normconst_verify_block(capsys):
    code, out, _ = run(
        capsys, ["normconst", "--theta=-1,3,-2", "--order", "2", "--verify"]
    )
    assert code == 0
    assert out["oracle"]["rel_diff"] < 1e-7
    assert len(out["derivs"]) == 3


def test_normconst_rejects_divergent(capsys):
    code, _, err = run(capsys, ["normconst", "--theta", "1,1"])
    assert code == 2
    assert "theta_2" in err


def test_normconst_bivariate_theta_file(capsys, tmp_path):
    theta_file = tmp_path / "theta.json"
    theta_file.write_text(
        json.dumps({"d": 2, "coeffs": {"20": -1.0, "11": -0.8, "02": -1.3}})
    )
    code, out, _ = run(
        capsys,
        ["normconst", "--mode", "bivariate", "--theta-file", str(theta_file), "--verify"],
    )
    assert code == 0
    assert out["oracle"]["rel_diff"] < 1e-6
    assert "00" in out["derivs"] and "11" in out["derivs"]
    assert out["A"] == pytest.approx(out["derivs"]["00"])


def test_normconst_needs_theta(capsys):
    code, _, err = run(capsys, ["normconst"])
    assert code == 2 and err


def test_fit_exponential(capsys, tmp_path):
    csv = write_sample(tmp_path, [1.0, 3.0])
    code, out, _ = run(capsys, ["fit", csv, "--d", "1"])
    assert code == 0
    assert out["converged"] is True
    assert out["theta_hat"][0] == pytest.approx(-0.5, rel=1e-10)
    assert out["n"] == 2


def test_fit_empty_csv(capsys, tmp_path):
    csv = tmp_path / "empty.csv"
    csv.write_text("")
    code, _, err = run(capsys, ["fit", str(csv), "--d", "1"])
    assert code == 2
    assert "EmptySample" in err


def test_fit_boundary_data_exit_code(capsys, tmp_path):
    # overdispersed sample: quadratic MLE sits on the boundary
    csv = write_sample(tmp_path, [0.05, 0.2, 2.75])
    code, out, _ = run(capsys, ["fit", csv, "--d", "2"])
    assert code == 3
    assert out["converged"] is False
    assert out["hit_boundary"] is True


def test_order_selects_cubic(capsys, tmp_path):
    x = sample_uni(ThetaUni((-1.0, 3.0, -2.0)), 1500, seed=10)
    csv = write_sample(tmp_path, x)
    code, out, _ = run(capsys, ["order", csv, "--dmax", "5"])
    assert code == 0
    assert out["chosen"] == 3
    assert [t["reject"] for t in out["trail"]] == [True, True, False]
    assert out["trail"][0]["null"] == "std_normal_lower_tail"


def test_order_degenerate_dmax(capsys, tmp_path):
    csv = write_sample(tmp_path, [0.5, 1.0, 2.0])
    code, out, _ = run(capsys, ["order", csv, "--dmax", "1"])
    assert code == 0
    assert out["chosen"] == 1
    assert out["trail"] == []


def test_simulate_small_run(capsys, tmp_path):
    out_dir = tmp_path / "sim"
    code, out, _ = run(
        capsys,
        [
            "simulate",
            "--theta=-1,3,-2",
            "--n",
            "200",
            "--reps",
            "8",
            "--seed",
            "7",
            "--out",
            str(out_dir),
        ],
    )
    assert code == 0
    assert out["statistic"] == "p"
    assert out["included"] + out["excluded"] == 8
    assert (out_dir / "stats.csv").exists()
    assert (out_dir / "summary.json").exists()
    on_disk = json.loads((out_dir / "summary.json").read_text())
    assert on_disk == out


def test_simulate_deterministic(capsys, tmp_path):
    argv = [
        "simulate",
        "--theta=-1,3,-2",
        "--n",
        "150",
        "--reps",
        "4",
        "--seed",
        "11",
    ]
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert cli.main(argv + ["--out", str(a)]) == 0
    assert cli.main(argv + ["--out", str(b)]) == 0
    capsys.readouterr()
    assert (a / "stats.csv").read_bytes() == (b / "stats.csv").read_bytes()


def test_simulate_boundary_theta_uses_score(capsys, tmp_path):
    out_dir = tmp_path / "sim"
    code, out, _ = run(
        capsys,
        [
            "simulate",
            "--theta=3,-2,0",
            "--n",
            "200",
            "--reps",
            "3",
            "--seed",
            "2",
            "--out",
            str(out_dir),
        ],
    )
    assert code == 0
    assert out["statistic"] == "score"
    assert out["columns"][0]["name"] == "T"
    assert out["null"] == "N(0,1)"


def test_simulate_single_rep_no_ks(capsys, tmp_path):
    code, out, _ = run(
        capsys,
        [
            "simulate",
            "--theta=-1",
            "--n",
            "50",
            "--reps",
            "1",
            "--out",
            str(tmp_path / "sim"),
        ],
    )
    assert code == 0
    assert out["ks_defined"] is False
    assert "ks_pvalue" not in out["columns"][0]


def test_simulate_bivariate_unsupported(capsys, tmp_path):
    code, _, err = run(
        capsys,
        ["simulate", "--mode", "bivariate", "--theta=-1,-1", "--out", str(tmp_path)],
    )
    assert code == 2
    assert "bivariate" in err


def test_chambers_fixture_points(capsys):
    code, out, _ = run(
        capsys,
        [
            "chambers",
            "--point=5,-3",
            "--point=0,0",
            "--point=-4,-4",
            "--point=1,1",
        ],
    )
    assert code == 0
    reports = {tuple(p["point"]): p for p in out["points"]}
    assert reports[(0.0, 0.0)]["chamber"] == "B"
    assert reports[(0.0, 0.0)]["proper"] is True
    assert reports[(0.0, 0.0)]["D"] == pytest.approx(27.0)
    assert reports[(0.0, 0.0)]["detp"] == pytest.approx(81.0)
    assert reports[(-4.0, -4.0)]["chamber"] == "C"
    assert reports[(1.0, 1.0)]["chamber"] == "boundary"
    assert reports[(1.0, 1.0)]["boundary"] is True


def test_chambers_detp_tracks_discriminant(capsys):
    code, out, _ = run(capsys, ["chambers", "--point=2,-1.5"])
    assert code == 0
    rep = out["points"][0]
    assert rep["detp"] == pytest.approx(3.0 * rep["D"], rel=1e-9)


def test_chambers_grid(capsys, tmp_path):
    out_dir = tmp_path / "ch"
    code, out, _ = run(
        capsys,
        [
            "chambers",
            "--grid",
            "--grid-range", "-3", "3",
            "--grid-step",
            "1.0",
            "--out",
            str(out_dir),
        ],
    )
    assert code == 0
    grid = out["grid"]
    assert grid["points"] == 49
    assert sum(grid["chamber_counts"].values()) == 49
    rows = (out_dir / "chambers_grid.csv").read_text().strip().split("\n")
    assert len(rows) == 49
    from exppoly.polyalg import discriminant

    for row in rows:
        a, b, D, name = row.split(",")
        assert name in {"A", "B", "C", "boundary"}
        assert float(D) == pytest.approx(
            discriminant((-1.0, float(b), float(a), -1.0)), rel=1e-12
        )


def test_chambers_requires_work(capsys):
    code, _, err = run(capsys, ["chambers"])
    assert code == 2 and err


def test_verify_fast_suites(capsys):
    code, out, err = run(
        capsys, ["verify", "--suite", "closedform", "--suite", "detp"]
    )
    assert code == 0
    assert out["all_passed"] is True
    assert {s["name"] for s in out["suites"]} == {"closedform", "detp"}
    assert "PASS" in err


def test_verify_failing_tolerance(capsys):
    code, out, err = run(capsys, ["verify", "--suite", "detp", "--tol", "1e-20"])
    assert code == 1
    assert out["all_passed"] is False
    assert "FAIL" in err
