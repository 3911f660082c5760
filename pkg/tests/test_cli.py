import json

import pytest

from zetamoments.cli import main


def test_maclaurin(capsys):
    assert main(["maclaurin-check"]) == 0
    out = capsys.readouterr().out
    assert "u1 u2 u3 w1 w2 w3 4" in out and out.strip().endswith("maclaurin-check ok")


def test_coeffs_k1(tmp_path, capsys):
    out = tmp_path / "k1.csv"
    assert main(["coeffs", "--k", "1", "--digits", "12", "--prime-limit", "100", "--stability", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "P=97" in text and "c_1=1.15443132980e+00" in text
    assert out.exists() and (tmp_path / "k1.csv.run.json").exists()
    assert json.loads((tmp_path / "k1.csv.run.json").read_text())["config"]["truncation_prime"] == 97
    assert not (tmp_path / "k1.csv.ckpt").exists()


def test_coeffs_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["coeffs", "--k", "2", "--digits", "10", "--prime-limit", "500"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--threads", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "not assessed" in a.read_text()


def test_coeffs_merge_and_diff(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["coeffs", "--k", "3", "--digits", "8", "--prime-limit", "30", "--stability", "--out", str(a)]) == 0
    assert main(["coeffs", "--k", "3", "--digits", "8", "--prime-limit", "3000", "--stability", "--out", str(b)]) == 0
    capsys.readouterr()
    assert main(["coeffs", "--merge", str(a), str(b), "--out", str(tmp_path / "m.csv")]) == 0
    assert "part2=" in capsys.readouterr().out
    assert main(["diff", str(a), str(b)]) == 0
    assert main(["diff", str(a), str(b), "--min-digits", "30"]) == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["coeffs", "--k", "0", "--digits", "12", "--prime-limit", "100"],
        ["coeffs", "--k", "2", "--digits", "3", "--prime-limit", "100"],
        ["coeffs", "--k", "2", "--digits", "12"],
        ["coeffs", "--k", "2", "--digits", "12", "--prime-limit", "100", "--auto-P"],
        ["coeffs", "--k", "2", "--digits", "12", "--prime-limit", "100", "--resume"],
        ["moments", "--k", "14"],
    ],
)
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err


def test_bad_file_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("# k=1\nr,value,stable_digits,source\n0,1.0,3,computed\n")
    assert main(["diff", str(bad), str(bad)]) == 2
    assert "bad.csv:3" in capsys.readouterr().err


def test_precision_alarm_exit_3(monkeypatch, capsys):
    import zetamoments.mpcontext as mc

    monkeypatch.setattr(mc, "working_digits_for", lambda k, d: 3 * d)
    assert main(["coeffs", "--k", "3", "--digits", "8", "--prime-limit", "100"]) == 3
    assert "precision alarm" in capsys.readouterr().err


def test_method1(tmp_path, capsys):
    out = tmp_path / "m.csv"
    assert main(["method1", "--k", "4", "--Q", "1000", "--digits", "30", "--out", str(out)]) == 0
    assert "c_0(4)=2.4650183919342273540" in capsys.readouterr().out
    assert "method1" in out.read_text()


def test_zeros_and_moments(tmp_path, capsys):
    z = tmp_path / "z.txt"
    assert main(["zeros", "--t-max", "1100", "--out", str(z)]) == 0
    assert "density_check=ok" in capsys.readouterr().out
    csv = tmp_path / "m.csv"
    assert main(["moments", "--k", "1", "--zeros", str(z), "--t-max", "1000", "--grid-step", "50", "--out", str(csv)]) == 0
    out = capsys.readouterr().out
    assert "points=20" in out and "std_sharp=" in out
    assert csv.read_text().startswith("j,T,data,conjecture,rel_remainder,running_avg")
    assert main(["moments", "--k", "1", "--zeros", str(z), "--t-max", "1000", "--grid-step", "5000"]) == 2


def test_moments_conjecture_only(capsys):
    assert main(["moments", "--k", "1", "--T", "100000000.642925639"]) == 0
    assert "1.673723498e+09" in capsys.readouterr().out
