import numpy as np
import pytest

from modeq import fit_order
from modeq.cli import (
    ExperimentSpec,
    main,
    parse_grid,
    parse_matrix,
    parse_phi,
    parse_vector,
    read_error_curve,
    run_experiment,
)
from modeq.errors import InputError


def run_cli(args):
    return main(list(args))


def test_parse_matrix():
    assert np.array_equal(parse_matrix("diag:1,2"), np.diag([1.0, 2.0]))
    assert np.array_equal(parse_matrix("full:2,1;1,2"),
                          np.array([[2.0, 1.0], [1.0, 2.0]]))
    for bad in ("1,2", "diag:a,b", "tri:1,2"):
        with pytest.raises(InputError):
            parse_matrix(bad)


def test_parse_vector_and_grid():
    assert np.array_equal(parse_vector("3,-2"), np.array([3.0, -2.0]))
    assert np.array_equal(parse_grid("0.04,0.02"), np.array([0.04, 0.02]))
    with pytest.raises(InputError):
        parse_grid("0.02,0.04")  # not decreasing
    with pytest.raises(InputError):
        parse_grid("0.02,-0.01")


def test_parse_phi():
    assert parse_phi("x1") == ("x", 0)
    assert parse_phi("x2") == ("x", 1)
    assert parse_phi("x1sq") == ("xx", 0, 0)
    assert parse_phi("x1x2") == ("xx", 0, 1)
    with pytest.raises(InputError):
        parse_phi("y1")


def test_ode_order_roundtrip(tmp_path, capsys):
    out = tmp_path / "oo.csv"
    code = run_cli(["ode-order", "--method", "euler", "--reference", "exact",
                    "--out", str(out), "--check"])
    assert code == 0
    text = capsys.readouterr().out
    assert "slope:" in text and "check: PASS" in text
    printed_slope = float(next(l for l in text.splitlines() if "slope:" in l)
                          .split(":")[1])
    curve = read_error_curve(out)
    refit = fit_order(curve)
    assert abs(refit.slope - printed_slope) < 1e-12
    # schema
    assert out.read_text().splitlines()[0] == "h,error,stderr"


def test_ode_trajectory(tmp_path, capsys):
    out = tmp_path / "tr.csv"
    code = run_cli(["ode-trajectory", "--h", "0.0375", "--T", "15",
                    "--out", str(out), "--check"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,series,dim0,dim1"
    series = {l.split(",")[1] for l in lines[1:]}
    assert series == {"exact", "euler", "symplectic-euler"}
    # 3 series x 401 states
    assert len(lines) == 1 + 3 * 401


def test_ou_weak_order(tmp_path, capsys):
    out = tmp_path / "ou.csv"
    code = run_cli(["ou-weak-order", "--method", "euler-maruyama",
                    "--reference", "modified", "--out", str(out), "--check"])
    assert code == 0
    assert "check: PASS" in capsys.readouterr().out


def test_optimizer_weak_order(tmp_path, capsys):
    out = tmp_path / "ow.csv"
    code = run_cli(["optimizer-weak-order", "--mode", "global", "--phi", "x1",
                    "--T", "0.5", "--h-grid", "0.05,0.025,0.0125",
                    "--out", str(out), "--check"])
    assert code == 0
    assert "check: PASS" in capsys.readouterr().out


def test_sigma_check(tmp_path, capsys):
    out = tmp_path / "sc.csv"
    code = run_cli(["sigma-check", "--d", "4", "--seed", "7",
                    "--out", str(out), "--check"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "trial,d,max_abs_diff,trace_abs_diff"
    assert len(lines) == 21


def test_stability_small(tmp_path, capsys):
    out = tmp_path / "st.csv"
    code = run_cli(["stability", "--paths", "400", "--T", "1.5",
                    "--grid", "15", "--seed", "3", "--out", str(out), "--check"])
    assert code == 0
    text = capsys.readouterr().out
    assert "verdict: PASS" in text
    assert out.read_text().splitlines()[0] == "t,msq,stderr,bound"


def test_stability_no_claim_when_h_exceeds_bound(tmp_path, capsys):
    out = tmp_path / "st2.csv"
    with pytest.warns(UserWarning, match="exceeds the guaranteed range"):
        code = run_cli(["stability", "--h", "1.0", "--delta", "0.01",
                        "--paths", "100", "--T", "1.5", "--grid", "15",
                        "--seed", "3", "--out", str(out), "--check"])
    assert code == 0
    text = capsys.readouterr().out
    assert "NO-CLAIM" in text
    assert "applicable: False" in text


def test_determinism_same_seed(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run_cli(["stability", "--paths", "300", "--T", "1.0",
                        "--grid", "10", "--seed", "11", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_determinism_across_workers(tmp_path):
    a, b = tmp_path / "w1.csv", tmp_path / "w4.csv"
    assert run_cli(["stability", "--paths", "300", "--T", "1.0", "--grid", "10",
                    "--seed", "11", "--workers", "1", "--out", str(a)]) == 0
    assert run_cli(["stability", "--paths", "300", "--T", "1.0", "--grid", "10",
                    "--seed", "11", "--workers", "4", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_validation_exit_code(tmp_path, capsys):
    code = run_cli(["stability", "--matrix", "diag:1,-2",
                    "--out", str(tmp_path / "x.csv")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as info:
        run_cli(["ode-order", "--no-such-flag", "1"])
    assert info.value.code == 2


def test_check_failure_exit_code(tmp_path, capsys):
    # far outside the asymptotic regime the fitted slope leaves the window
    code = run_cli(["ode-order", "--h-grid", "5,3,1.5", "--T", "15",
                    "--out", str(tmp_path / "bad.csv"), "--check"])
    assert code == 4
    assert "check: FAIL" in capsys.readouterr().out


def test_divergence_exit_code(tmp_path, capsys):
    code = run_cli(["ode-order", "--h-grid", "3,1.5,0.75", "--T", "2400",
                    "--out", str(tmp_path / "div.csv")])
    assert code == 3
    assert "divergence:" in capsys.readouterr().err


def test_run_experiment_rejects_unknown_keys(tmp_path):
    spec = ExperimentSpec(name="sigma-check", params={"d": 3, "bogus": 1},
                          out=tmp_path / "s.csv")
    with pytest.raises(InputError):
        run_experiment(spec)


def test_csv_17_digit_roundtrip(tmp_path):
    out = tmp_path / "r.csv"
    assert run_cli(["ou-weak-order", "--out", str(out)]) == 0
    curve = read_error_curve(out)
    # values survive the text roundtrip exactly
    from modeq.measure import ou_weak_error_curve
    ref = ou_weak_error_curve("euler_maruyama", "exact",
                              [0.04, 0.02, 0.01, 0.005], 1.0, 10.0, 1.0, 0.1)
    assert np.array_equal(curve.errors, ref.errors)
    assert np.array_equal(curve.hs, ref.hs)
