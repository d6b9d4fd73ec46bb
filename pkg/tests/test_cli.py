import json

import pytest

from watsonlab import closedform
from watsonlab.cli import main

PI2_4_30 = "2.46740110027233965470862274996"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_watson_base(capsys):
    code, out, _ = run(capsys, "eval", "-a", "1", "-b", "1", "-c", "1",
                       "-i", "0", "-j", "0", "--digits", "40")
    assert code == 0
    assert PI2_4_30 in out
    assert "method = accelerated" in out


def test_eval_exact_zero(capsys):
    code, out, _ = run(capsys, "eval", "-a", "-1", "-b", "1", "-c", "1",
                       "-i", "0", "-j", "0")
    assert code == 0
    assert "0 (exact)" in out


def test_eval_divergent(capsys):
    code, _, err = run(capsys, "eval", "-a", "2", "-b", "2", "-c", "1",
                       "-i", "0", "-j", "0")
    assert code == 1
    assert "divergent" in err


def test_eval_rational_params(capsys):
    code, out, _ = run(capsys, "eval", "-a", "1/2", "-b", "0.5", "-c", "2",
                       "-j", "-1", "--digits", "20", "--output", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["value"].startswith("1.4147106052612918")


def test_digits_floor_rejected(capsys):
    code, _, _ = run(capsys, "suite", "--digits", "10")
    assert code == 2
    code, _, _ = run(capsys, "eval", "-a", "1", "-b", "1", "-c", "1", "--digits", "2000")
    assert code == 2


def test_check_unknown_relation(capsys):
    code, _, err = run(capsys, "check", "nosuch")
    assert code == 2
    assert "unknown relation" in err


def test_check_exit_codes(capsys):
    closedform.reset_registry()
    code, out, _ = run(capsys, "check", "recurrence_16", "--samples", "6",
                       "--digits", "20", "--threads", "1")
    assert code == 0
    assert "verdict: identity" in out
    code, out, _ = run(capsys, "check", "three_term_printed", "--samples", "4",
                       "--digits", "20")
    assert code == 1
    assert "counterexample" in out and "a=0" in out
    closedform.reset_registry()


def test_check_json_and_csv(capsys):
    code, out, _ = run(capsys, "check", "macrobert", "--samples", "4",
                       "--digits", "20", "--output", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["relation_id"] == "macrobert"
    assert doc["verdict"] == "identity"
    assert "paper_anchor" in doc and doc["samples"]
    code, out, _ = run(capsys, "check", "macrobert", "--samples", "4",
                       "--digits", "20", "--output", "csv")
    assert code == 0
    header = out.splitlines()[0]
    assert header.startswith("relation_id,index,kind,i,j,param_a")


def test_reduce_text(capsys):
    code, out, _ = run(capsys, "reduce", "-a", "1", "-b", "1", "-c", "1", "-j", "1",
                       "--digits", "25")
    assert code == 0
    assert "-1/9" in out
    assert "1.4674011002723396" in out


def test_reduce_rejects_bad_indices(capsys):
    code, _, _ = run(capsys, "reduce", "-a", "1", "-b", "1", "-c", "1", "-j", "-1")
    assert code == 2
    code, _, _ = run(capsys, "reduce", "-a", "1", "-b", "1", "-c", "1", "-j", "1", "-i", "1")
    assert code == 2


def test_env_digits_default(capsys, monkeypatch):
    monkeypatch.setenv("WATSON_DIGITS", "18")
    code, out, _ = run(capsys, "eval", "-a", "-1", "-b", "1", "-c", "1",
                       "--output", "json")
    assert code == 0
    assert json.loads(out)["digits"] == 18


@pytest.fixture(scope="module")
def small_suite(tmp_path_factory):
    """One compact suite run shared by the remaining CLI assertions."""
    path = tmp_path_factory.mktemp("suite") / "report.json"
    code = main(["suite", "--digits", "20", "--samples", "4", "--seed", "7",
                 "--out", str(path), "--threads", "1"])
    return code, path.read_bytes()


def test_suite_writes_report_and_passes(small_suite, capsys):
    code, blob = small_suite
    assert code == 0
    doc = json.loads(blob)
    assert doc["suite_version"] == "1"
    assert doc["digits"] == 20 and doc["seed"] == 7
    ids = [r["relation_id"] for r in doc["relations"]]
    assert ids[:5] == ["gauss", "watson_00", "lavoie_plus", "lavoie_minus", "recurrence_16"]
    assert ids[-1] == "debranges"
    by_id = {r["relation_id"]: r for r in doc["relations"]}
    assert by_id["lavoie_minus"]["verdict"] == "not_identity"
    assert by_id["three_term_printed"]["verdict"] == "not_identity"
    assert by_id["case_2_m1"]["transcription_flags"]
    registry = {r["form_id"]: r for r in doc["closed_form_registry"]}
    assert registry["lavoie_minus"]["status"] == "refuted"
    assert "source_equation" in registry["watson_00"]


def test_suite_byte_identical_and_thread_independent(small_suite, tmp_path, capsys):
    _, blob = small_suite
    p2 = tmp_path / "again.json"
    code = main(["suite", "--digits", "20", "--samples", "4", "--seed", "7",
                 "--out", str(p2), "--threads", "2"])
    assert code == 0
    assert p2.read_bytes() == blob


def test_suite_out_path_failure(capsys):
    code, _, err = run(capsys, "suite", "--digits", "20", "--samples", "1",
                       "--out", "/nonexistent-dir/report.json")
    assert code == 2
    assert "cannot write" in err
