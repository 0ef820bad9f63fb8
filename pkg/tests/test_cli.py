import json

import pytest

from circrank.cli import family_specs, run
from circrank.matrix import load_matrix


def _run_json(argv, capsys):
    rc = run(argv)
    out = capsys.readouterr().out
    return rc, json.loads(out)


def test_gen_then_binrank(tmp_path, capsys):
    m = tmp_path / "m.json"
    assert run(["gen", "--spec", "2;4,4", "--complement", "--out", str(m)]) == 0
    rc, obj = _run_json(["binrank", "--matrix", str(m)], capsys)
    assert rc == 0
    assert obj["exact"] == 7 and obj["lower"] == obj["upper"] == 7
    assert len(obj["witness"]["rects"]) == 7


def test_gen_shuffle_is_seeded(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        assert run(["gen", "--spec", "2;5,3", "--shuffle", "--seed", "7", "--format", "text", "--out", str(p)]) == 0
    assert a.read_text() == b.read_text()
    M = load_matrix(a.read_text())
    assert M.shape == (8, 8) and M.count_ones() == 16


def test_rank_text(capsys):
    assert run(["rank", "--spec", "3;9,9", "--format", "text"]) == 0
    assert capsys.readouterr().out.strip() == "real rank: 14"


def test_construct_verify_roundtrip(tmp_path, capsys):
    p = tmp_path / "p.json"
    assert run(["construct", "--spec", "3;9,9", "--out", str(p)]) == 0
    rc, obj = _run_json(["verify", "--partition", str(p)], capsys)
    assert rc == 0 and obj["ok"] and obj["size"] == 16


def test_verify_failure_exit_1(tmp_path, capsys):
    p = tmp_path / "p.json"
    run(["construct", "--spec", "2;5,5", "--out", str(p)])
    obj = json.loads(p.read_text())
    big = max(obj["rects"], key=lambda r: len(r["rows"]) * len(r["cols"]))
    big["rows"] = big["rows"][:-1]
    p.write_text(json.dumps(obj))
    rc, out = _run_json(["verify", "--partition", str(p)], capsys)
    assert rc == 1 and not out["ok"] and out["cell"] is not None


@pytest.mark.parametrize("text, where", [
    ("2 2\n01\n1x\n", "line 3, column 2"),
    ("2 2\n01\n", "line"),
])
def test_malformed_matrix_exit_2(tmp_path, capsys, text, where):
    f = tmp_path / "bad.txt"
    f.write_text(text)
    assert run(["rank", "--matrix", str(f)]) == 2
    assert where in capsys.readouterr().err


def test_malformed_partition_exit_2(tmp_path, capsys):
    f = tmp_path / "bad.json"
    f.write_text('{"rects": [\n')
    assert run(["verify", "--partition", str(f)]) == 2
    assert "line 2, column 1" in capsys.readouterr().err


def test_missing_inputs_exit_2(capsys):
    assert run(["binrank"]) == 2
    assert run(["rank", "--spec", "3;x"]) == 2
    assert run(["rank", "--matrix", "/nonexistent/file"]) == 2


def test_certify_reports_bracket(capsys):
    rc, obj = _run_json(["certify", "--spec", "3;9,9", "--complement"], capsys)
    assert rc == 0
    assert obj["lower"] <= obj["upper"] == 16
    assert obj["real_rank"] == 14


def test_canon_recovers_sizes(tmp_path, capsys):
    m = tmp_path / "m.txt"
    run(["gen", "--spec", "2;5,3,2", "--shuffle", "--format", "text", "--out", str(m)])
    rc, obj = _run_json(["canon", "--matrix", str(m)], capsys)
    assert rc == 0 and obj["sizes"] == [5, 3, 2]


def test_canon_rejects_non_2regular(tmp_path, capsys):
    m = tmp_path / "m.txt"
    run(["gen", "--spec", "3;5", "--format", "text", "--out", str(m)])
    assert run(["canon", "--matrix", str(m)]) == 2


def test_check_theorems_2regular(capsys):
    rc, obj = _run_json(["check-theorems", "--family", "2-regular", "--max-n", "8"], capsys)
    assert rc == 0 and obj["ok"]
    assert len(obj["rows"]) == len(family_specs("2-regular", 8))
    assert all(r["complement"]["exact"] is not None for r in obj["rows"])


def test_family_specs_shapes():
    assert {str(s) for s in family_specs("2-regular", 5)} >= {"2;5", "2;3,2", "2;4"}
    assert all(s.n <= 6 for s in family_specs("common-k", 6, k=3))
