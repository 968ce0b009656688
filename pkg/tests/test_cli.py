import json
import subprocess
import sys

import pytest

from biquadeuclid.cli import main, record


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def records(out):
    return [json.loads(line) for line in out.splitlines()]


def test_class_number_table(capsys):
    code, out, _ = run(capsys, "class-number", "11", "19", "13")
    assert code == 0
    header, _, row = out.splitlines()
    assert header.split() == ["(q,k,r)", "h(q)", "h(kr)", "h(qkr)", "unit_index", "h_K"]
    assert row.split()[0] == "(11,19,13)" and row.split()[-1] == "2"


def test_class_number_json(capsys):
    code, out, _ = run(capsys, "class-number", "37", "11", "109", "--format", "json-lines")
    (rec,) = records(out)
    assert code == 0
    assert rec["schema_version"] == 1 and rec["record"] == "class_number"
    assert rec["h_K"] == "2"
    assert 4 * int(rec["h_K"]) == int(rec["unit_index"]) * int(rec["h_q"]) * int(rec["h_kr"]) * int(rec["h_qkr"])


@pytest.mark.parametrize(
    "argv",
    [
        ["class-number", "4", "6", "8"],
        ["class-number", "11", "11", "13"],
        ["witness", "3", "7", "5"],
        ["witness", "11", "19", "23"],
        ["class-number", "11", "19"],
        ["density", "11", "19", "13", "10"],
        ["residue-search", "9"],
        ["class-number", "11", "19", "13", "--precision", "0"],
        ["nonsense"],
    ],
)
def test_invalid_input_exit_code(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_enumerate_below_range(capsys):
    code, out, _ = run(capsys, "enumerate", "12", "--format", "json-lines")
    assert code == 0 and out == ""


def test_enumerate_75(capsys):
    code, out, _ = run(capsys, "enumerate", "75", "--format", "json-lines")
    found = {(int(r["q"]), int(r["k"]), int(r["r"])) for r in records(out)}
    assert code == 0
    for k in (19, 23, 31, 43, 47, 59, 67, 71):
        assert (11, k, 13) in found
    assert all(r["h_K"] == "2" for r in records(out))


@pytest.mark.slow
def test_enumerate_110_reaches_table_two(capsys):
    code, out, _ = run(capsys, "enumerate", "110", "--format", "json-lines")
    found = {(int(r["q"]), int(r["k"]), int(r["r"])) for r in records(out)}
    assert code == 0 and (37, 11, 109) in found and (41, 11, 53) in found


def test_enumerate_table_format(capsys):
    code, out, _ = run(capsys, "enumerate", "20")
    assert code == 0
    assert "(11,19,13)" in out and "(19,11,13)" in out
    assert out.index("(11,19,13)") < out.index("q = 1 (mod 4)")


def test_witness_json(capsys):
    code, out, _ = run(capsys, "witness", "11", "19", "13", "--format", "json-lines")
    (rec,) = records(out)
    assert code == 0
    assert rec["record"] == "witness" and rec["verified"] is True
    assert rec["u"] == "7" and rec["modulus"] == "10868" and rec["case_id"] == "Case2"
    assert rec["sample_symbols"] == ["1", "-1", "-1"]


def test_witness_deterministic(capsys):
    first = run(capsys, "witness", "11", "19", "13")
    second = run(capsys, "witness", "11", "19", "13")
    assert first == second and first[0] == 0


def test_density_small(capsys):
    code, out, _ = run(capsys, "density", "11", "19", "13", "1000", "--format", "json-lines")
    (rec,) = records(out)
    assert code == 0
    assert int(rec["count_XH"]) <= int(rec["count_XK"])
    assert 0 <= rec["ratio_diff"] <= 1


def test_density_threads_agree(capsys):
    one = run(capsys, "density", "11", "19", "13", "--bound", "100000", "--format", "json-lines")
    two = run(capsys, "density", "11", "19", "13", "--bound", "100000", "--threads", "2", "--format", "json-lines")
    assert one == two


def test_verify_theorem_passes(capsys):
    code, out, _ = run(capsys, "verify-theorem", "11", "19", "13", "100000", "--format", "json-lines")
    recs = records(out)
    assert code == 0
    assert [r["status"] for r in recs[:-1]] == ["PASS"] * 7
    assert recs[-1]["record"] == "verdict" and recs[-1]["passed"] is True


def test_verify_theorem_default_bound(capsys):
    code, out, _ = run(capsys, "verify-theorem", "11", "19", "13")
    assert code == 0 and out.rstrip().endswith("VERDICT PASS")
    assert "X = 100000" in out.splitlines()[0]


def test_verify_theorem_ineligible(capsys):
    code, out, _ = run(capsys, "verify-theorem", "2", "19", "13", "--format", "json-lines")
    recs = records(out)
    assert code == 1
    status = {r["stage"]: r["status"] for r in recs if r["record"] == "stage"}
    assert status["eligibility"] == "FAIL"
    assert status["certificate"] == "SKIP"


def test_residue_search(capsys):
    code, out, _ = run(capsys, "residue-search", "19", "--format", "json-lines")
    (rec,) = records(out)
    assert code == 0 and rec["least_qr3"] == "7" and rec["least_qnr3"] == "3"
    code, out, _ = run(capsys, "residue-search", "--bound", "5000")
    assert code == 0 and "failures 0" in out


def test_record_integers_are_strings():
    rec = json.loads(record("x", n=10**40, ok=True, xs=[1, 2], r=0.5))
    assert rec == {"schema_version": 1, "record": "x", "n": str(10**40), "ok": True, "xs": ["1", "2"], "r": 0.5}


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "biquadeuclid.cli", "class-number", "4", "6", "8"], capture_output=True, text=True
    )
    assert proc.returncode == 2 and "error" in proc.stderr


def test_low_precision_is_raised(capsys, monkeypatch):
    from biquadeuclid import cli

    seen = []
    real = cli.class_number_row
    monkeypatch.setattr(cli, "class_number_row", lambda t, bits: seen.append(bits) or real(t, bits))
    code, _, _ = run(capsys, "class-number", "11", "19", "13", "--precision", "40")
    assert code == 0 and seen == [128]
