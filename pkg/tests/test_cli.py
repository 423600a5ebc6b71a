import json

import pytest

from tracelogic.cli import main

SAFE = "role r(A, N) as B { recv N from A assert true }\nscenario { r(B = b) }\n"


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse reports usage errors this way
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, text, name="spec.tlp"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_no_attack_exits_zero(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", write(tmp_path, SAFE))
    assert code == 0
    assert "no attack found (bounded to this scenario)" in out


def test_violation_exits_one(capsys):
    code, out, _ = run(capsys, "verify", "--fixture", "tmn_mutual")
    assert code == 1
    assert "ε(s) → b : s,b,a" in out
    assert "no attack found" not in out


def test_parse_error_exits_two(capsys, tmp_path):
    path = write(tmp_path, "role r(A) as B {\n  recv A from B assert exists x : true }")
    code, _, err = run(capsys, "verify", path)
    assert code == 2
    assert err.startswith(f"{path}:2:")


def test_usage_errors_exit_two(capsys, tmp_path):
    assert run(capsys, "verify")[0] == 2
    assert run(capsys, "verify", "--fixture", "nope")[0] == 2
    assert run(capsys, "verify", str(tmp_path / "missing.tlp"))[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_cap_exits_three(capsys):
    code, out, _ = run(capsys, "verify", "--fixture", "tmn_secrets", "--all", "--max-states", "1")
    assert code == 3
    assert "capped" in out and "no attack found" not in out


def test_json_report_schema(capsys):
    code, out, _ = run(capsys, "verify", "--fixture", "tmn_mutual", "--format", "json")
    assert code == 1
    rep = json.loads(out)
    assert set(rep) == {"scenario", "options", "violations", "stats", "status"}
    [v] = rep["violations"]
    assert v["formula"] == "a_to_b"
    assert v["rendered"] == ["ε(s) → b : s,b,a"]
    ev = v["trace"][0]
    assert ev["direction"] == "recv" and ev["actor"] == {"const": "b"}
    assert rep["status"] == "exhausted"


def test_options_block_is_honoured(capsys, tmp_path):
    from tracelogic.fixtures import source

    text = source("tmn_mutual") + "\noptions { all = true }\n"
    code, out, _ = run(capsys, "verify", write(tmp_path, text), "--format", "json")
    assert code == 1 and len(json.loads(out)["violations"]) > 1


def test_quiet_prints_only_the_verdict(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", write(tmp_path, SAFE), "--quiet")
    assert out.strip().splitlines() == [out.strip()]


def test_parse_subcommand_round_trips(capsys, tmp_path):
    from tracelogic.dsl import parse
    from tracelogic.fixtures import source

    code, out, _ = run(capsys, "parse", write(tmp_path, source("tmn_original")))
    assert code == 0
    assert parse(out) == parse(source("tmn_original"))


def test_fixtures_listing(capsys):
    code, out, _ = run(capsys, "fixtures")
    assert code == 0
    assert [line.split()[0] for line in out.strip().splitlines()] == [
        "tmn_original", "tmn_timestamps", "tmn_secrets", "tmn_mutual"]


def test_console_script_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "tracelogic", "fixtures"], capture_output=True, text=True)
    assert proc.returncode == 0 and "tmn_mutual" in proc.stdout
