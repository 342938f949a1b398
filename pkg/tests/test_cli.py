import json

import pytest

from prisyn import generators as gen
from prisyn.cli import main
from prisyn.model import parse_system, system_to_text


@pytest.fixture
def phil2(tmp_path):
    path = tmp_path / "phil2.sys"
    path.write_text(system_to_text(gen.philosophers(2)))
    return str(path)


@pytest.fixture
def attractor(tmp_path):
    path = tmp_path / "attr.sys"
    path.write_text(system_to_text(gen.attractor_example()))
    return str(path)


def test_check_unsafe_exit_code(phil2, capsys):
    assert main(["check", phil2, "--mode", "deadlock"]) == 1
    out = capsys.readouterr().out
    assert "unsafe (deadlock)" in out and "trace:" in out


def test_check_safe_after_synthesis(phil2, tmp_path, capsys):
    fixed = gen.philosophers(2).with_priorities(gen.philosophers_local_fix(2))
    p = tmp_path / "fixed.sys"
    p.write_text(system_to_text(fixed))
    assert main(["check", str(p), "--mode", "deadlock"]) == 0
    assert "safe" in capsys.readouterr().out


def test_check_engines_agree(phil2, capsys):
    for engine in ("explicit", "symbolic"):
        code = main(["check", phil2, "--mode", "deadlock",
                     "--engine", engine, "--json"])
        assert code == 1
        report = json.loads(capsys.readouterr().out)
        assert report["outcome"] == "unsafe (deadlock)"
        assert len(report["trace"]) == 2


def test_json_and_text_report_same_facts(attractor, capsys):
    assert main(["synth", attractor, "--mode", "risk", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert main(["synth", attractor, "--mode", "risk"]) == 0
    text = capsys.readouterr().out
    assert report["outcome"] == "success"
    for low, high in report["priorities"]:
        assert f"priority {low} < {high};" in text
    assert report["priorities"] == [["a", "c"], ["b", "a"], ["g", "c"]]
    assert report["verified"] is True
    assert "verified: True" in text


def test_synth_emit_cnf(attractor, tmp_path, capsys):
    cnf_path = tmp_path / "out.cnf"
    assert main(["synth", attractor, "--mode", "risk",
                 "--emit-cnf", str(cnf_path)]) == 0
    capsys.readouterr()
    lines = cnf_path.read_text().splitlines()
    header = [l for l in lines if l.startswith("p cnf")]
    assert len(header) == 1
    nvars, nclauses = map(int, header[0].split()[2:])
    assert nvars > 0 and nclauses > 0
    assert sum(1 for l in lines if l.endswith(" 0")) == nclauses


def test_synth_stats(phil2, capsys):
    assert main(["synth", phil2, "--mode", "deadlock", "--stats",
                 "--ordering", "force", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    stats = report["statistics"]
    assert stats["variables"] == 26
    assert "variable_order" in stats and stats["variable_order"].startswith("stg")
    assert stats["deadlock_nodes"] > 0


def test_synth_keep_abstraction(tmp_path, capsys):
    p = tmp_path / "phil10.sys"
    p.write_text(system_to_text(gen.philosophers(10)))
    assert main(["synth", str(p),
                 "--keep", "phil_1,fork_1,phil_2,fork_2", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["outcome"] == "success"
    assert report["statistics"]["variables"] == 38
    assert report["abstracted_labels"] == 30
    assert report["verified"] is True


def test_agsynth(phil2, tmp_path, capsys):
    spec = tmp_path / "risk.dfa"
    spec.write_text("""
dfa {
  states q0 qbad qok;
  alphabet eat_1 release_1;
  init q0;
  accept qbad;
  q0 -eat_1-> qok;
  q0 -release_1-> qbad;
  qok -eat_1-> qok;
  qok -release_1-> qok;
  qbad -eat_1-> qbad;
  qbad -release_1-> qbad;
}
""")
    assert main(["agsynth", phil2, "--split", "phil_1,fork_1",
                 "--spec", str(spec), "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["outcome"] == "success"
    assert report["priorities"] == [["release_1", "eat_1"]]
    assert report["statistics"]["conjecture_sizes"] == [2, 3, 5]


def test_agsynth_rejects_deadlock_mode(phil2, tmp_path, capsys):
    spec = tmp_path / "risk.dfa"
    spec.write_text("dfa { states q0; alphabet eat_1; init q0; accept ; }")
    code = main(["agsynth", phil2, "--split", "phil_1,fork_1",
                 "--spec", str(spec), "--mode", "deadlock"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_generate_deterministic_and_parseable(capsys):
    assert main(["generate", "philosophers", "--n", "4"]) == 0
    first = capsys.readouterr().out
    assert main(["generate", "philosophers", "--n", "4"]) == 0
    assert capsys.readouterr().out == first
    assert parse_system(first) == gen.philosophers(4)
    for family in ("dpu", "attractor", "repush", "abstraction", "shared"):
        assert main(["generate", family]) == 0
        parse_system(capsys.readouterr().out)


def test_generate_requires_size(capsys):
    assert main(["generate", "philosophers"]) == 2
    assert "at least 2" in capsys.readouterr().err


def test_missing_model_file_is_an_error(capsys):
    assert main(["check", "/nonexistent/model.sys"]) == 2
    assert "error:" in capsys.readouterr().err
