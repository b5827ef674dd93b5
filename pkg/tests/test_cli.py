import json

import pytest

from sepkit.cli import main
from sepkit.records import strip_timestamp

C4_TEXT = "4 4\n0 1\n1 2\n2 3\n3 0\n"


@pytest.fixture
def c4_file(tmp_path):
    path = tmp_path / "c4.txt"
    path.write_text(C4_TEXT)
    return path


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_exact_record(c4_file, capsys):
    code, record = run_json(capsys, ["exact", "--graph", str(c4_file), "--c", "0.25"])
    assert code == 0
    assert record["results"]["value"] == 2
    assert record["results"]["cut_members"] == [0, 1]
    assert record["schema_version"] == "1"


def test_exact_missing_file_exit_2(tmp_path, capsys):
    code = main(["exact", "--graph", str(tmp_path / "nope.txt"), "--c", "0.25"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_exact_cap_exit_2(tmp_path, capsys):
    big = tmp_path / "big.txt"
    big.write_text("25 1\n0 1\n")
    code = main(["exact", "--graph", str(big), "--c", "0.25"])
    assert code == 2
    assert "cap" in capsys.readouterr().err


def test_solve_rejects_out_of_range_p(c4_file, capsys):
    code = main(["solve", "--graph", str(c4_file), "--p", "2.5", "--c", "0.25"])
    assert code == 2


def test_solve_p2_writes_matrix(c4_file, tmp_path, capsys):
    out_matrix = tmp_path / "gram.json"
    code, record = run_json(
        capsys,
        [
            "solve", "--graph", str(c4_file), "--p", "2", "--c", "0.25",
            "--out-matrix", str(out_matrix), "--seed", "1",
        ],
    )
    assert code == 0
    assert record["results"]["relaxation_value"] <= 2.0 + 1e-5
    assert record["results"]["matrix_kind"] == "gram"
    doc = json.loads(out_matrix.read_text())
    assert doc["n"] == 4
    assert len(doc["matrix"]) == 4


def test_solve_p1_emits_z(c4_file, tmp_path, capsys):
    out_matrix = tmp_path / "z.json"
    code, record = run_json(
        capsys,
        [
            "solve", "--graph", str(c4_file), "--p", "1", "--c", "0.25",
            "--starts", "2", "--out-matrix", str(out_matrix),
        ],
    )
    assert code == 0
    assert record["results"]["matrix_kind"] == "z"
    assert record["results"]["relaxation_value"] <= 2.0 + 1e-5


def test_pipeline_record_and_determinism(c4_file, capsys):
    argv = ["pipeline", "--graph", str(c4_file), "--p", "2", "--c", "0.25", "--seed", "9"]
    code1, rec1 = run_json(capsys, argv)
    code2, rec2 = run_json(capsys, argv)
    assert code1 == code2 == 0
    assert strip_timestamp(rec1) == strip_timestamp(rec2)
    assert rec1["results"]["succeeded"]
    assert rec1["results"]["cut_size"] >= 2


def test_pipeline_needs_graph_or_batch(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["pipeline", "--p", "1", "--c", "0.25"])
    assert exc.value.code == 2


def test_pipeline_rounding_failure_exit_1(c4_file, capsys):
    code, record = run_json(
        capsys,
        [
            "pipeline", "--graph", str(c4_file), "--p", "2", "--c", "0.25",
            "--sigma", "100", "--retries", "2",
        ],
    )
    assert code == 1
    assert record["results"]["succeeded"] is False


def test_pipeline_batch_csv_and_records(tmp_path, capsys):
    (tmp_path / "a.txt").write_text(C4_TEXT)
    (tmp_path / "b.txt").write_text("2 1\n0 1\n")
    out_csv = tmp_path / "agg.csv"
    rec_dir = tmp_path / "records"
    code = main(
        [
            "pipeline", "--batch", str(tmp_path), "--p", "2", "--c", "0.25",
            "--out-csv", str(out_csv), "--jobs", "2",
            "--records-dir", str(rec_dir),
        ]
    )
    assert code in (0, 1)
    lines = out_csv.read_text().strip().splitlines()
    assert lines[0].startswith("graph,n,m,p,c,seed")
    assert len(lines) == 3
    recs = sorted(p.name for p in rec_dir.glob("*.record.json"))
    assert recs == ["a.record.json", "b.record.json"]
    doc = json.loads((rec_dir / "a.record.json").read_text())
    assert doc["results"]["n"] == 4


def test_pipeline_embedding_passthrough(c4_file, tmp_path, capsys):
    # round a hand-built cut embedding without solving
    emb = tmp_path / "emb.json"
    emb.write_text(
        json.dumps({"n": 4, "d": 1, "vectors": [[1.0], [1.0], [-1.0], [-1.0]]})
    )
    code, record = run_json(
        capsys,
        [
            "pipeline", "--graph", str(c4_file), "--p", "1", "--c", "0.25",
            "--embedding", str(emb), "--seed", "4",
        ],
    )
    assert code == 0
    assert record["results"]["relaxation_value"] == pytest.approx(2.0)


def test_convert_dimacs(tmp_path, capsys):
    src = tmp_path / "g.dimacs"
    src.write_text("c hello\np edge 3 2\ne 1 2\ne 2 3\n")
    code = main(["convert-dimacs", "--in", str(src)])
    assert code == 0
    assert capsys.readouterr().out == "3 2\n0 1\n1 2\n"


def test_convert_dimacs_rejects_garbage(tmp_path, capsys):
    src = tmp_path / "g.dimacs"
    src.write_text("p edge 3 1\ne 1 9\n")
    assert main(["convert-dimacs", "--in", str(src)]) == 2


def test_gaussian_test_record(capsys):
    code, record = run_json(
        capsys,
        ["gaussian-test", "--d", "25", "--x", "0.1", "--samples", "20000", "--seed", "3"],
    )
    assert code == 0
    assert record["results"]["empirical_low"] <= record["results"]["bound_low"]


def test_verify_unknown_suite_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "nothing"])
    assert exc.value.code == 2
    assert "invalid choice" in capsys.readouterr().err


def test_verify_roundtrip_suite(capsys):
    code = main(["verify", "--suite", "roundtrip", "--seed", "1"])
    out = capsys.readouterr().out
    assert code == 0
    assert "suite roundtrip: PASS" in out


def test_seed_env_default(c4_file, capsys, monkeypatch):
    monkeypatch.setenv("SEPKIT_SEED", "123")
    code, record = run_json(
        capsys, ["pipeline", "--graph", str(c4_file), "--p", "2", "--c", "0.25"]
    )
    assert code == 0
    assert record["config"]["seed"] == 123


def test_solve_then_round_artifact_flow(c4_file, tmp_path, capsys):
    emb_path = tmp_path / "emb.json"
    code, solve_rec = run_json(
        capsys,
        [
            "solve", "--graph", str(c4_file), "--p", "2", "--c", "0.25",
            "--out-embedding", str(emb_path), "--seed", "2",
        ],
    )
    assert code == 0
    code, rec = run_json(
        capsys,
        [
            "pipeline", "--graph", str(c4_file), "--p", "2", "--c", "0.25",
            "--embedding", str(emb_path),
            "--relaxation-value", str(solve_rec["results"]["relaxation_value"]),
            "--seed", "2",
        ],
    )
    assert code == 0
    assert rec["results"]["succeeded"]
