import csv
import json
import math
import shutil
from pathlib import Path

import pytest
import yaml

from infoenv.cli import EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION, run
from infoenv.scenario import ScenarioError, load_document, parse_scenario

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"

TRADEOFF = {
    "version": 1,
    "source": {"kind": "categorical", "probs": [0.375, 0.25, 0.125, 0.125, 0.125]},
    "coder": {"kind": "huffman"},
    "channel": {"kind": "constant", "c": 3.0},
    "analysis": {"kind": "tradeoff", "c": [2.6, 3.0, 4.0], "epsilon": [1e-6]},
}


def write(tmp_path, doc, name="sc.yaml"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if name.endswith(".json") else yaml.safe_dump(doc))
    return p


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_reproduce_table1(tmp_path, capsys):
    assert run(["reproduce", "table1", "--out", str(tmp_path)]) == EXIT_OK
    head, rows = read_csv(tmp_path / "table1.csv")
    assert head == ["s", "w", "log2_w_plus_2", "p_hit", "l_over_s"]
    assert len(rows) == 8 and rows[4][1] == str(2 ** 31 - 2)
    assert "backend" in capsys.readouterr().out


def test_reproduce_table2(tmp_path):
    assert run(["reproduce", "table2", "--out", str(tmp_path), "-q"]) == EXIT_OK
    head, rows = read_csv(tmp_path / "table2.csv")
    assert head[:3] == ["s", "H_over_s", "l_over_s"] and rows[-1][-1] == "256"


def test_reproduce_fig3_columns(tmp_path):
    assert run(["reproduce", "fig3", "--out", str(tmp_path), "-q"]) == EXIT_OK
    head, rows = read_csv(next(tmp_path.glob("*.csv")))
    assert head[0] == "c" and len(head) >= 4
    cs = [float(r[0]) for r in rows]
    assert cs == sorted(cs)


def test_reproduce_is_bit_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["reproduce", "fig2", "--out", str(a), "-q"])
    run(["reproduce", "fig2", "--out", str(b), "-q"])
    for f in a.glob("*.csv"):
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_analyze_yaml_and_json_agree(tmp_path):
    y = write(tmp_path, TRADEOFF)
    j = write(tmp_path, TRADEOFF, "sc.json")
    assert run(["analyze", str(y), "--out", str(tmp_path / "y"), "-q"]) == EXIT_OK
    assert run(["analyze", str(j), "--out", str(tmp_path / "j"), "-q"]) == EXIT_OK
    ya = (tmp_path / "y" / "tradeoff.csv").read_text()
    assert ya == (tmp_path / "j" / "tradeoff.csv").read_text()
    head, rows = read_csv(tmp_path / "y" / "tradeoff.csv")
    assert head[:3] == ["c", "epsilon", "d"]
    assert float(rows[0][2]) == pytest.approx(15.98, abs=0.01)


def test_summary_echoes_parameters(tmp_path, capsys):
    run(["analyze", str(write(tmp_path, TRADEOFF))])
    out = capsys.readouterr().out
    assert "== tradeoff ==" in out and "theta" in out and "tolerance" in out


@pytest.mark.parametrize("name", ["geometric_huffman_tradeoff.yaml", "five_symbol_envelope.yaml",
                                  "markov_grouped_compose.yaml"])
def test_shipped_scenarios(name, tmp_path):
    assert run(["analyze", str(SCENARIOS / name), "--out", str(tmp_path), "-q"]) == EXIT_OK
    assert list(tmp_path.glob("*.csv"))


def test_output_field_used(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    doc = dict(TRADEOFF, output="res")
    assert run(["analyze", str(write(tmp_path, doc)), "-q"]) == EXIT_OK
    assert (tmp_path / "res" / "tradeoff.csv").exists()


@pytest.mark.parametrize("patch,path", [
    ({"source": {"kind": "categorical", "probs": [0.5, 0.6]}}, "source.probs"),
    ({"source": {"kind": "zipf"}}, "source.kind"),
    ({"coder": {"kind": "arith"}}, "coder.kind"),
    ({"coder": {"kind": "grouped", "s": 2}}, "coder.kind"),
    ({"channel": {"kind": "gilbert-elliott", "R": 6, "Q": [[1.0]]}}, "channel.Q"),
    ({"analysis": {"kind": "tradeoff", "c": [3.0], "epsilon": [2.0]}}, "analysis.epsilon[0]"),
    ({"analysis": {"kind": "tradeoff"}}, "analysis.c"),
    ({"version": 2}, "version"),
    ({"colour": "blue"}, "colour"),
])
def test_validation_errors(tmp_path, capsys, patch, path):
    doc = {**TRADEOFF, **patch}
    assert run(["analyze", str(write(tmp_path, doc))]) == EXIT_VALIDATION
    assert f"validation error: {path}" in capsys.readouterr().err


def test_unreadable_and_malformed_files(tmp_path, capsys):
    assert run(["analyze", str(tmp_path / "missing.yaml")]) == EXIT_VALIDATION
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["analyze", str(bad)]) == EXIT_VALIDATION
    listy = tmp_path / "list.yaml"
    listy.write_text("- 1\n- 2\n")
    assert run(["analyze", str(listy)]) == EXIT_VALIDATION
    assert "parse error" in capsys.readouterr().err


def test_numeric_failure_exit(tmp_path, capsys):
    doc = dict(TRADEOFF, analysis={"kind": "tradeoff", "c": [1.0, 2.0], "epsilon": [1e-6]})
    assert run(["analyze", str(write(tmp_path, doc)), "-q"]) == EXIT_NUMERIC
    assert "numeric failure" in capsys.readouterr().err


def test_partial_infinite_curve_is_not_fatal(tmp_path):
    doc = dict(TRADEOFF, analysis={"kind": "tradeoff", "c": [2.0, 3.0], "epsilon": [1e-6]})
    assert run(["analyze", str(write(tmp_path, doc)), "--out", str(tmp_path), "-q"]) == EXIT_OK
    _, rows = read_csv(tmp_path / "tradeoff.csv")
    assert rows[0][2] == "inf" and math.isfinite(float(rows[1][2]))


def test_simulate_verb(tmp_path):
    doc = {**TRADEOFF, "analysis": {"kind": "simulate", "slots": 20000, "seed": 3,
                                    "replications": 2, "epsilon": [0.01], "trace": True}}
    p = write(tmp_path, doc)
    assert run(["simulate", str(p), "--out", str(tmp_path / "o"), "-q"]) == EXIT_OK
    head, rows = read_csv(tmp_path / "o" / "simulate.csv")
    assert head[-1] == "dominated" and len(rows) == 2
    assert (tmp_path / "o" / "trace.csv").exists()
    # --seed overrides the scenario seed, same seed reproduces
    run(["simulate", str(p), "--out", str(tmp_path / "s1"), "--seed", "9", "-q"])
    run(["simulate", str(p), "--out", str(tmp_path / "s2"), "--seed", "9", "-q"])
    assert (tmp_path / "s1" / "simulate.csv").read_bytes() == \
        (tmp_path / "s2" / "simulate.csv").read_bytes()


def test_simulate_needs_simulate_analysis(tmp_path):
    assert run(["simulate", str(write(tmp_path, TRADEOFF))]) == EXIT_VALIDATION


def test_shipped_json_simulation_parses():
    sc = parse_scenario(load_document(SCENARIOS / "ge_simulate.json"))
    assert sc.analysis["slots"] == 1_000_000 and sc.channel[0] == "gilbert-elliott"


@pytest.mark.parametrize("argv", [["reproduce", "fig99"], ["analyze", "x.yaml", "--seed", "-1"],
                                  ["analyze", "x.yaml", "--tolerance", "2"], []])
def test_bad_arguments(argv):
    with pytest.raises(SystemExit) as exc:
        run(argv)
    assert exc.value.code == 2


def test_scenario_error_has_path():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario({"analysis": {"kind": "envelope"}})
    assert exc.value.path == "<root>.source"


def test_module_entry_point():
    import subprocess
    import sys
    out = subprocess.run([sys.executable, "-m", "infoenv", "--version"], capture_output=True,
                         text=True)
    assert out.returncode == 0 and out.stdout.startswith("infoenv ")
    assert shutil.which("infoenv") is not None
