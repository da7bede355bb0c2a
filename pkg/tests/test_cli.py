import io
import json

import pytest

from helpers import SCENARIOS

from ghost.cli import REPORT_KEYS, RunConfig, build_parser, format_report, main, run


def run_script(tmp_path, text, **config):
    path = tmp_path / "case.gs"
    path.write_text(text)
    out, err = io.StringIO(), io.StringIO()
    code = run(RunConfig(str(path), **config), out, err)
    return code, out.getvalue(), err.getvalue(), path


def test_success_prints_a_report(tmp_path):
    code, out, err, path = run_script(tmp_path, "| a |\na := 3 + 4.\nself assert: a equals: 7.\n",
                                      report="json")
    assert code == 0 and err == ""
    report = json.loads(out)
    assert list(report) == list(REPORT_KEYS)
    assert not (tmp_path / "case.gs.trace").exists()


def test_assertion_failure_exits_1(tmp_path):
    code, _, err, _ = run_script(tmp_path, "\nself assert: 1 equals: 2.\n")
    assert code == 1 and ":2:" in err


def test_runtime_error_exits_2(tmp_path):
    code, _, err, _ = run_script(tmp_path, "3 frobnicate.\n")
    assert code == 2 and "frobnicate" in err


def test_parse_error_exits_3(tmp_path):
    code, _, err, _ = run_script(tmp_path, "x := .\n")
    assert code == 3 and "1:" in err


def test_unreadable_script_exits_3(tmp_path):
    err = io.StringIO()
    assert run(RunConfig(str(tmp_path / "missing.gs")), io.StringIO(), err) == 3
    assert "cannot read" in err.getvalue()


def test_report_formats_agree(tmp_path):
    script = (SCENARIOS / "swap.gs").read_text()
    _, as_json, _, _ = run_script(tmp_path, script, report="json")
    _, as_text, _, _ = run_script(tmp_path, script, report="text")
    parsed = dict(line.split(": ") for line in as_text.strip().splitlines())
    assert {k: str(v) for k, v in json.loads(as_json).items()} == parsed
    assert format_report(json.loads(as_json), "json") == as_json.strip()


@pytest.mark.parametrize("mode", ["interceptions", "all-sends"])
def test_trace_sidecar(tmp_path, mode):
    code, _, _, path = run_script(tmp_path, (SCENARIOS / "paper-tests.gs").read_text(), trace=mode)
    assert code == 0
    events = [json.loads(line) for line in (tmp_path / "case.gs.trace").read_text().splitlines()]
    assert any(e["kind"] == "intercept" and e["action"] == "methodExec" for e in events)
    assert any(e["kind"] == "send" for e in events) == (mode == "all-sends")


def test_segments_directory(tmp_path):
    code, _, _, _ = run_script(tmp_path, (SCENARIOS / "swap.gs").read_text(),
                               segments=str(tmp_path / "segs"))
    assert code == 0 and (tmp_path / "segs").is_dir()


def test_argument_parsing():
    args = build_parser().parse_args(["x.gs", "--trace=all-sends", "--report=json", "--seed=3"])
    assert (args.script, args.trace, args.report, args.seed) == ("x.gs", "all-sends", "json", 3)
    with pytest.raises(SystemExit):
        build_parser().parse_args(["x.gs", "--trace=loud"])


@pytest.mark.parametrize("script", sorted(p.name for p in SCENARIOS.glob("*.gs")))
def test_scenarios_pass(script, capsys):
    assert main([str(SCENARIOS / script), "--seed=7"]) == 0
    assert "objects:" in capsys.readouterr().out
