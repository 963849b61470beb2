import json
import subprocess
import sys
from pathlib import Path

import pytest

from scat2 import cache
from scat2.cli import run
from scat2.engine import compute_csd

GOLDEN = Path(__file__).parent / "golden" / "table_b3c2.txt"


def test_compute_then_table_matches_golden(tmp_path, capsys):
    out = tmp_path / "b3c2.tau"
    assert run(["compute", "--b", "3", "--c", "2", "--degree", "14", "--out", str(out)]) == 0
    capsys.readouterr()
    assert run(["table", "--in", str(out), "--imax", "7", "--jmax", "7"]) == 0
    assert capsys.readouterr().out == GOLDEN.read_text()
    assert cache.decode_table(out.read_bytes()) == compute_csd(3, 2, 14)


def test_table_output_is_deterministic(capsys):
    run(["table", "--b", "3", "--c", "2", "--degree", "14", "--imax", "7", "--jmax", "7"])
    first = capsys.readouterr().out
    run(["table", "--b", "3", "--c", "2", "--degree", "14", "--imax", "7", "--jmax", "7"])
    assert capsys.readouterr().out == first == GOLDEN.read_text()


def test_compute_to_stdout(capsys):
    assert run(["compute", "--b", "2", "--c", "2", "--degree", "4"]) == 0
    first = capsys.readouterr().out.splitlines()[0]
    assert first.startswith("scat2 v1 numeric b=2 c=2 D=4 created=")
    header = cache.parse_header(first)
    assert (header.b, header.c, header.D) == (2, 2, 4) and header.created.endswith("Z")


@pytest.mark.parametrize(
    "argv",
    [
        ["compute", "--b", "0", "--c", "2"],
        ["compute", "--b", "3"],
        ["compute", "--b", "0x3", "--c", "2"],
        ["compute", "--b", "3", "--c", "2", "--deg", "4"],
        ["verify", "--conjecture", "19"],
        ["fit", "--i", "2"],
        ["fit", "--i", "2", "--j", "2", "--grid", "1:4"],
        ["table"],
        ["table", "--in", "/nonexistent/x.tau"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv) == 2
    assert capsys.readouterr().err


def test_malformed_cache_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.tau"
    p.write_text("scat2 v1 numeric b=3 c=2 D=5\ntau 2 3 fourteen\n")
    assert run(["table", "--in", str(p)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_consistency(tmp_path, capsys):
    good = tmp_path / "good.tau"
    table = compute_csd(3, 2, 8)
    good.write_bytes(cache.encode_table(table))
    assert run(["consistency", "--in", str(good)]) == 0
    out = capsys.readouterr().out
    assert out.count("clean") == 8
    table.values[(2, 3)] += 1
    bad = tmp_path / "bad.tau"
    bad.write_bytes(cache.encode_table(table))
    assert run(["consistency", "--in", str(bad)]) == 1
    out = capsys.readouterr().out
    assert "degree 4: clean" in out and "degree 5: defect" in out


def test_fit_command(tmp_path, capsys):
    out = tmp_path / "sym.tau"
    assert run(["fit", "--i", "2", "--j", "2", "--out", str(out)]) == 0
    assert capsys.readouterr().out == "tau 2 2 poly: 1/2*g^2 + g*b*c - g*b - g*c + 1/2*g\n"
    assert b"tau 2 2 poly: " in out.read_bytes()
    assert run(["fit", "--i", "1", "--j", "2", "--grid", "1:5,1:5", "--holdout", "4"]) == 0
    assert capsys.readouterr().out == "tau 1 2 poly: 1/2*g*b - 1/2*g\n"


def test_fit_block(capsys):
    assert run(["fit", "--imax", "2", "--jmax", "2"]) == 0
    assert capsys.readouterr().out.count("poly:") == 4


def test_verify_exit_codes(tmp_path, capsys):
    out = tmp_path / "rep.txt"
    argv = ["verify", "--conjecture", "7", "--imax", "6", "--bmax", "5", "--cmax", "5", "--out", str(out)]
    assert run(argv) == 0
    line = out.read_text().strip()
    assert cache.decode_report_line(line)[:3] == (7, "verified", "i<=6,b<=5,c<=5,D=20")
    # beyond the table degree: inconclusive
    assert run(["verify", "--conjecture", "13", "--jmax", "3", "--degree", "6"]) == 2
    assert "inconclusive" in capsys.readouterr().out


def test_verify_falsification_exit_1(monkeypatch, capsys):
    import scat2.conjectures as conj

    monkeypatch.setattr(conj, "c13_value", lambda j: 999)
    assert run(["verify", "--conjecture", "13", "--jmax", "2"]) == 1
    captured = capsys.readouterr()
    assert "falsified" in captured.out and "FALSIFIED" in captured.err


def test_export(tmp_path, capsys):
    p = tmp_path / "t.tau"
    p.write_bytes(cache.encode_table(compute_csd(3, 2, 5)))
    assert run(["export", "--in", str(p)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["b"] == 3 and ["2", "3"] != data["tau"][0] and [2, 3, "14"] in data["tau"]
    assert run(["export", "--conjecture", "5", "--jmax", "3", "--bmax", "3", "--cmax", "3"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep[0]["id"] == 5 and rep[0]["status"] == "verified-in-range"


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "scat2", "compute", "--b", "3", "--c", "2", "--degree", "3"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and "tau 2 1 1" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "scat2", "compute", "--b", "0", "--c", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2 and "usage" in proc.stderr
