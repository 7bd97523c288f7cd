import json
from pathlib import Path

import pytest

from unitlab import __version__
from unitlab.cli import main
from unitlab.reports import CSV_HEADER, read_csv


@pytest.fixture(name="diagonal")
def fixture_diagonal(tmp_path: Path) -> Path:
    path = tmp_path / "diagonal.txt"
    assert main(["gen", "--family", "diagonal", "--d", "2", "--n", "5", "--out", str(path)]) == 0
    return path


def test_gen(diagonal: Path) -> None:
    lines = diagonal.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "2 10 5"
    assert lines[1:3] == ["5 0", "0 5"]


def test_simulate(diagonal: Path, tmp_path: Path, capsys) -> None:
    transcript, csv_path = tmp_path / "t.txt", tmp_path / "r.csv"
    argv = ["simulate", "--alg", "greedy", "--instance", str(diagonal), "--transcript", str(transcript)]
    argv += ["--opt-formula", "--family", "diagonal", "--param", "5", "--csv", str(csv_path)]
    assert main(argv) == 0
    assert capsys.readouterr().out == "ALG=5 OPT=2 ratio=5/2\n"
    assert transcript.read_text(encoding="utf-8").splitlines()[0] == "1 greedy 0 1 1 0"
    [report] = read_csv(csv_path)
    assert (report.family, report.param, report.alg_count, report.opt) == ("diagonal", 5, 5, 2)


def test_simulate_exact_oracle(diagonal: Path, capsys) -> None:
    assert main(["simulate", "--alg", "grid", "--instance", str(diagonal)]) == 0
    assert capsys.readouterr().out.startswith("ALG=")


def test_opt(tmp_path: Path, capsys) -> None:
    path = tmp_path / "pair.txt"
    assert main(["gen", "--family", "diagonal", "--d", "2", "--n", "1", "--out", str(path)]) == 0
    assert main(["opt", "--instance", str(path), "--cubes"]) == 0
    assert capsys.readouterr().out == "OPT=1\n0 0\n"


def test_oracle_limit_exits_3(tmp_path: Path, capsys) -> None:
    path = tmp_path / "s1.txt"
    assert main(["gen", "--family", "s1", "--d", "2", "--K", "10", "--out", str(path)]) == 0
    assert main(["opt", "--instance", str(path)]) == 3
    assert "oracle limit" in capsys.readouterr().err


def test_oracle_limit_from_config(diagonal: Path, tmp_path: Path) -> None:
    config = tmp_path / "lab.json"
    config.write_text('{"oracle": {"max_points": 4}}', encoding="utf-8")
    assert main(["--config", str(config), "opt", "--instance", str(diagonal)]) == 3


def test_duel_covering(tmp_path: Path, capsys) -> None:
    log = tmp_path / "duel.jsonl"
    assert main(["duel", "--adversary", "covering", "--alg", "centered", "--d", "2", "--log", str(log)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "ALG=4 OPT=1 ratio=4"
    assert out[1].startswith("trials=1 mean=4.0000")
    events = [json.loads(line) for line in log.read_text(encoding="utf-8").splitlines()]
    assert [event["step"] for event in events] == [1, 2, 3, 4]
    assert all(event["trial"] == 0 for event in events)


def test_duel_clustering_trials(tmp_path: Path, capsys) -> None:
    csv_path = tmp_path / "duel.csv"
    argv = ["duel", "--adversary", "clustering", "--alg", "grid", "--d", "2", "--K", "4"]
    argv += ["--trials", "2", "--csv", str(csv_path)]
    assert main(argv) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == CSV_HEADER
    assert len(out) == 8
    assert out[3:5] == ["trial 0", "round 1 [0 0]: points=16 clusters=16 small=16 big=0 certified=0 expired=16"]
    assert [r.ratio for r in read_csv(csv_path)] == [4, 4]


def test_duel_clustering_prints_rounds(tmp_path: Path, capsys) -> None:
    log = tmp_path / "duel.jsonl"
    argv = ["duel", "--adversary", "clustering", "--alg", "greedy", "--d", "4", "--K", "4", "--log", str(log)]
    assert main(argv) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "round 1 [0 0 0 0]: points=256 clusters=16 small=0 big=16 certified=16 expired=16"
    assert out[1].startswith("round 2 [1 0 0 0]: points=256 clusters=40 ")
    assert out[2] == "ALG=40 OPT=24 ratio=5/3"
    events = [json.loads(line) for line in log.read_text(encoding="utf-8").splitlines()]
    assert events[256] == {"trial": 0, "round": 1, "choice": [0, 1], "certified": 16, "small": 0, "big": 16}
    rows = events[-1]["rounds"]
    assert [row["round"] for row in rows] == [1, 2]
    assert sum(row["expired"] for row in rows) <= 40


def test_report(tmp_path: Path, capsys) -> None:
    csv_path = tmp_path / "runs.csv"
    csv_path.write_text(CSV_HEADER + "\ndiagonal,2,5,greedy,0,5,2,5,2\n", encoding="utf-8")
    assert main(["report", str(csv_path)]) == 0
    out = capsys.readouterr().out
    assert "greedy" in out
    assert "greedy on diagonal: d=2:2.5000" in out


def test_report_without_files(capsys) -> None:
    assert main(["report"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate"],
        ["gen", "--family", "spiral", "--d", "2", "--out", "x"],
        ["gen", "--family", "s1", "--d", "2", "--K", "4", "--n", "4", "--out", "x"],
        ["frobnicate"],
        ["simulate", "--alg", "grid", "--instance", "x", "--opt-formula"],
        ["simulate", "--alg", "grid", "--instance", "x", "--opt-formula", "--family", "random"],
    ],
    ids=["missing-args", "bad-family", "exclusive-size", "bad-command", "formula-without-family", "formula-for-random"],
)
def test_usage_errors_exit_1(argv) -> None:
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == 1


def test_bad_input_exits_1(tmp_path: Path, capsys) -> None:
    bad = tmp_path / "bad.txt"
    bad.write_text("2 1 1\n1\n", encoding="utf-8")
    assert main(["opt", "--instance", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err
    assert main(["opt", "--instance", str(tmp_path / "missing.txt")]) == 1
    assert main(["gen", "--family", "s1", "--d", "2", "--K", "5", "--out", str(tmp_path / "x")]) == 1


def test_version(capsys) -> None:
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert capsys.readouterr().out.strip() == f"unitlab {__version__}"
