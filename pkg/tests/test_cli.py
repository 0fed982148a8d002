import json
import re
import subprocess
import sys
from fractions import Fraction

import pytest

from freebool.cli import COMMANDS, EXIT_COUNTEREXAMPLE, EXIT_EXHAUSTED, EXIT_INVALID, EXIT_OK, main, run

SPACE = {
    "points": ["a", "b", "c"],
    "basepoint": "*",
    "flavor": "graev-basepoint",
    "dist": [
        ["a", "b", "1/4"], ["a", "c", "1/2"], ["b", "c", "1/2"],
        ["*", "a", "1"], ["*", "b", "1"], ["*", "c", "1"],
    ],
}

CONFIGS = {
    "norm": {"space": SPACE, "word": ["a", "b", "c"]},
    "dist": {"space": SPACE, "g": ["a"], "h": ["b"]},
    "majorize": {"space": SPACE, "normalize": True},
    "nbhd": {"points": ["a", "b", "c"], "covers": [[["a", "b"], ["c"]]], "word": ["a", "b"]},
    "linear-subgroup": {"points": ["a", "b", "c", "d"], "cover": [["a", "b"], ["c", "d"]], "word": ["a", "c"]},
    "filter-check": {"filter": "evens", "set": "cofinite-minus:[0,2]&evens"},
    "diag": {"family": "j>2i", "count": 6},
    "selective": {"filter": "evens", "family": "blocks:2", "mode": "selector", "bound": 16},
    "pseudo": {"filter": {"schema": "mult:2^i"}, "family": "mult:2^i", "depth": 4},
    "mathias": {"c1": {"s": [2, 4], "A": "evens>4"}, "c2": {"s": [], "A": "evens"}},
    "laver": {"nbhd": {"table": [{"s": [], "A": "evens"}], "default": "mult:4"}, "words": [[2, 8], [2, 6], []]},
    "laver-refine": {"nbhd": {"default": "evens"}, "filter": "evens", "check_max": 16, "check_len": 4},
    "probe-closure": {"family": "evens>i", "filter": "frechet", "max_elt": 8, "max_len": 3},
    "witness": {"schema": "mult:2^i", "r": {"scale": "1/1"}, "n": 1},
    "flag-basis": {"chain": [["10", "01"], ["11"], []], "basis": ["10", "01"]},
    "greedy-basis": {"basis": ["10", "01"], "norm": {"10": "5", "01": "4", "11": "2"}},
    "verify-bounds": {"basis": ["10", "01"], "norm": {"10": "5", "01": "4", "11": "2"}},
}

RATIONAL = re.compile(r"-?\d+/\d+")


def go(command, **inputs):
    return run({"schema": "bft/1", "command": command, **inputs})


def test_every_command_has_a_config():
    assert set(CONFIGS) == set(COMMANDS)


@pytest.mark.parametrize("command", sorted(CONFIGS))
def test_every_command_runs(command):
    report, status = go(command, inputs=CONFIGS[command])
    assert status == EXIT_OK, report
    assert report["status"] == "ok" and report["anchor"] and report["schema"] == "bft/1"
    assert report["config"]["inputs"] == CONFIGS[command]


def test_examples():
    assert go("norm", space=SPACE, word=["a", "b"])[0]["norm"] == "1/4"
    assert go("diag", family="j>2i", count=6)[0]["D"] == [0, 1, 3, 7, 15, 31]
    assert go("norm", word=[])[0]["norm"] == "0/1"


def test_command_results():
    assert go("norm", inputs=CONFIGS["norm"])[0]["norm"] == "5/4"
    assert go("laver", inputs=CONFIGS["laver"])[0]["members"] == [[[2, 8], True], [[2, 6], False], [[], True]]
    assert go("witness", inputs=CONFIGS["witness"])[0]["word"] == [18, 28]
    assert go("flag-basis", inputs=CONFIGS["flag-basis"])[0]["basis"] == ["10", "11"]
    assert go("greedy-basis", inputs=CONFIGS["greedy-basis"])[0]["basis"] == ["10", "11"]
    assert go("pseudo", inputs=CONFIGS["pseudo"])[0]["verdict"] == "refuted"
    assert go("linear-subgroup", inputs=CONFIGS["linear-subgroup"])[0]["signature"] == "11"


def _fractions(doc):
    if isinstance(doc, dict):
        for v in doc.values():
            yield from _fractions(v)
    elif isinstance(doc, list):
        for v in doc:
            yield from _fractions(v)
    elif isinstance(doc, str) and RATIONAL.fullmatch(doc):
        yield doc


@pytest.mark.parametrize("command", ["norm", "dist", "majorize", "witness", "verify-bounds", "greedy-basis"])
def test_rationals_round_trip(command):
    report, _ = go(command, inputs=CONFIGS[command])
    found = list(_fractions({k: v for k, v in report.items() if k not in ("config", "schema")}))
    assert found
    for s in found:
        p, q = s.split("/")
        assert f"{Fraction(int(p), int(q)).numerator}/{Fraction(int(p), int(q)).denominator}" == s
    assert "." not in json.dumps({k: v for k, v in report.items() if k not in ("config", "anchor", "note")})


def test_exit_codes():
    assert go("bogus")[1] == EXIT_INVALID
    assert go("norm", space={"points": ["a"], "dist": [["a", "*", 0.5]]}, word=["a"])[1] == EXIT_INVALID
    assert go("diag", family="finite:[0,1]", count=5)[1] == EXIT_EXHAUSTED
    report, status = go("laver-refine", nbhd={"default": "mult:2^i", "shift": 1}, check_max=16, check_len=4)
    assert status == EXIT_COUNTEREXAMPLE and report["counterexample"]
    assert run({"schema": "bft/2", "command": "norm"})[1] == EXIT_INVALID
    assert go("diag", family="j>i", count=3, bounds={"bound": 0})[1] == EXIT_INVALID


def test_error_locations():
    report, _ = go("norm", space={"points": ["a"], "dist": [["a", "*"]]}, word=["a"])
    assert "inputs.space.dist[0]" in report["error"]
    report, _ = go("diag", family="j>i")
    assert "inputs.count" in report["error"]


def test_main_writes_report_and_is_deterministic(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"schema": "bft/1", "command": "verify-bounds", "seed": 5,
                               "basis": ["100", "010", "001"], "norm": {"random": {}}}))
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert main(["--config", str(cfg), "--out", str(out)]) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert main(["--config", str(cfg), "--seed", "6", "--quiet"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["reports"]


def test_main_bound_flag(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "diag", "family": "j>2i", "count": 8}))
    assert main(["--config", str(cfg), "--bound", "20", "--quiet", "--out", str(tmp_path / "o.json")]) == EXIT_EXHAUSTED
    assert json.loads((tmp_path / "o.json").read_text())["bound"] == 20


def test_main_parse_diagnostic(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"command":\n  }')
    assert main(["--config", str(cfg)]) == EXIT_INVALID
    assert "bad.json:2:3" in capsys.readouterr().err


def test_main_usage_errors(capsys):
    assert main([]) == EXIT_INVALID
    assert main(["--config", "/nonexistent/x.json"]) == EXIT_INVALID


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "diag", "family": "j>2i", "count": 6}))
    proc = subprocess.run([sys.executable, "-m", "freebool", "--config", str(cfg)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["D"] == [0, 1, 3, 7, 15, 31]
