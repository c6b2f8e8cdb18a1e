import io
import json

import pytest

from bdspace.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_validate_default_passes():
    code, out, _ = run("validate", "--a", "0.97", "--b", "0.443648", "--lambda", "8.61")
    d = json.loads(out)
    assert code == 0
    assert d["validation"]["verdict"] == "pass"
    assert d["alpha"]["alpha"] == pytest.approx(2 / 3, abs=1e-4)
    assert d["validation"]["cubic_residual"] > 0


def test_validate_infeasible_exit_1():
    code, out, _ = run("validate", "--a", "0.8", "--b", "0.6")
    assert code == 1
    d = json.loads(out)
    assert [c["holds"] for c in d["validation"]["conditions"]] == [True, False, True]


def test_validate_malformed_exit_2():
    code, _, err = run("validate", "--a", "zero.9")
    assert code == 2 and "cannot parse" in err
    assert run("frobnicate")[0] == 2


def test_validate_exact_mode_prints_rationals():
    code, out, _ = run("validate", "--mode", "exact", "--a", "9/10", "--b", "3/10", "--lambda", "3")
    d = json.loads(out)
    assert code == 0
    assert d["validation"]["min_lambda"] == "9/4"


def test_build_dims():
    code, out, _ = run("build", "--stages", "6")
    d = json.loads(out)
    assert code == 0
    assert d["dims"] == [1, 1, 5, 45, 1305, 272745]
    assert d["gamma_counts"] == [0, 4, 40, 1260, 271440]


def test_build_paper_strict_warning():
    code, out, err = run("build", "--stages", "6", "--convention", "paper-strict", "--format", "csv")
    assert code == 0
    assert "warning" in err
    assert [line.split(",")[1] for line in out.splitlines()[1:]] == ["1"] * 6


def test_build_cap_exit_3():
    code, _, err = run("build", "--stages", "7")
    assert code == 3 and "stage 7" in err


def test_build_gamma_csv(tmp_path):
    path = tmp_path / "g.csv"
    code, _, _ = run("build", "--stages", "4", "--gamma-csv", str(path))
    assert code == 0
    assert len(path.read_text().splitlines()) == 45


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\na = 0.8\nb = 0.6\nstages=3\n")
    assert run("validate", "--config", str(cfg))[0] == 1
    # flags override the file
    code, out, _ = run("validate", "--config", str(cfg), "--b", "0.443648")
    assert code == 0
    code, out, _ = run("build", "--config", str(tmp_path / "missing.cfg"))
    assert code == 2


def test_grow_l2():
    code, out, _ = run("grow", "--candidate", "l2", "--count", "16")
    d = json.loads(out)
    assert code == 0
    assert abs(d["full"]["exponent"] - 0.5) <= 1e-10


def test_grow_l2_exact_squares():
    code, out, _ = run("grow", "--candidate", "l2", "--count", "5", "--widths", "3", "--mode", "exact")
    assert code == 0
    assert json.loads(out)["squared_norms"] == ["1", "2", "3", "4", "5"]


def test_grow_bd_side_by_side():
    code, out, _ = run("grow", "--stages", "5", "--count", "20")
    d = json.loads(out)
    assert code == 0
    assert "exponent" in d["full"] and d["alpha"] == pytest.approx(2 / 3, abs=1e-9)
    assert d["note"].startswith("exploratory")


def test_grow_refuses_count_1():
    code, _, err = run("grow", "--count", "1")
    assert code == 2 and "refused" in err


def test_grow_csv(tmp_path):
    out_path = tmp_path / "g.csv"
    code, _, _ = run("grow", "--candidate", "l2", "--count", "4", "--format", "csv", "--out", str(out_path))
    assert code == 0
    assert out_path.read_text().splitlines()[:3] == ["n,norm", "1,1.0", "2,1.41421356237"]


def test_probe_zero(tmp_path):
    path = tmp_path / "z.csv"
    path.write_text("0,0,0\n" * 5)
    code, out, _ = run("probe", str(path))
    d = json.loads(out)
    assert code == 0
    assert (d["op_norm"]["lower"], d["op_norm"]["upper"]) == (0.0, 0.0)
    assert d["witness"]["block"] is None


def test_probe_geometric(tmp_path):
    path = tmp_path / "g.csv"
    path.write_text(",".join(str(2.0**-i) for i in range(9)) + "\n")
    code, out, _ = run("probe", "--operator", str(path), "--C1", "1", "--C2", "1")
    d = json.loads(out)
    assert code == 0
    tail = [sum(4.0**-i for i in range(k, 9)) ** 0.5 for k in range(10)]
    assert d["defect_profile"]["delta"] == pytest.approx(tail, rel=1e-11)
    c = d["contradiction"]
    assert c["C1"] == 1 and c["C2"] == 1
    assert c["bound"] >= 1


def test_probe_bad_file(tmp_path):
    assert run("probe", str(tmp_path / "none.csv"))[0] == 2
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3,4\n")
    assert run("probe", str(path))[0] == 2  # no stage has dimension 2
