import numpy as np
import pytest

from conftest import write_dataset
from oracles import naive_mf
from relretro.cli import PipelineConfig, main, parse_report, run_pipeline, validate
from relretro.core import RetrofitConfig
from relretro.embedding_io import load_embeddings
from relretro.graph import read_edge_list


def run(toy_dir, tmp_path, *extra):
    out = tmp_path / "out.txt"
    report = tmp_path / "report.txt"
    status = main(["--manifest", str(toy_dir / "manifest.json"), "--embeddings", str(toy_dir / "embeddings.txt"),
                   "--out", str(out), "--report", str(report), *extra])
    return status, out, report


def test_rn_defaults_unit_norm(toy_dir, tmp_path):
    status, out, report = run(toy_dir, tmp_path)
    assert status == 0
    emb = load_embeddings(out)
    assert len(emb) == 5
    np.testing.assert_allclose(np.linalg.norm(emb.matrix, axis=1), 1.0, atol=1e-6)
    entries, trace = parse_report(report.read_text())
    assert entries["mode"] == "RN" and entries["delta"] == "1.0"
    assert trace == []


def test_ro_default_config_trace(toy_dir, tmp_path):
    status, _, report = run(toy_dir, tmp_path, "--mode", "RO", "--alpha", "1", "--beta", "0", "--gamma", "3",
                            "--delta", "3")
    assert status == 0
    entries, trace = parse_report(report.read_text())
    assert len(trace) == 21
    assert all(b <= a for a, b in zip(trace[1:], trace[2:]))
    # this configuration is outside the convex regime on the toy data
    assert entries["convexity_strict_ok"] == "False" and entries["convexity_stated_ok"] == "True"


def test_report_counts(toy_dir, tmp_path):
    status, _, report = run(toy_dir, tmp_path, "--mode", "RO", "--delta", "1")
    assert status == 0
    entries, trace = parse_report(report.read_text())
    assert entries["n"] == "5"
    assert entries["category countries.name"] == "2" and entries["category movies.title"] == "3"
    assert entries["group movies.title→countries.name"] == "3"
    assert entries["oov_terms"] == "0"
    assert entries["iterations_run"] == "20"
    assert all(k in entries for k in ("time_solve", "time_load_embeddings", "time_tokenize"))
    assert all(b <= a + 1e-12 for a, b in zip(trace[1:], trace[2:]))


def test_mf_matches_scalar_oracle(toy_dir, tmp_path):
    status, out, _ = run(toy_dir, tmp_path, "--mode", "MF")
    assert status == 0
    emb = load_embeddings(out)
    keys = list(emb.vocab)
    # toy catalog order: France, USA, Inception, The Godfather, Amélie
    W0 = np.array([[-0.4, 0.8], [0.8, -0.5], [0.9, 0.3], [0.7, 0.6], [0.1, 1.0]])
    E = [(4, 0), (0, 4), (2, 1), (1, 2), (3, 1), (1, 3)]
    assert keys[3] == "movies.title#The%20Godfather"
    np.testing.assert_allclose(emb.matrix, naive_mf(W0, E, 20), rtol=0, atol=1e-12)


def test_missing_embeddings_exit_2(toy_dir, tmp_path, capsys):
    out = tmp_path / "out.txt"
    status = main(["--manifest", str(toy_dir / "manifest.json"), "--embeddings", str(tmp_path / "nope.txt"),
                   "--out", str(out)])
    assert status == 2
    assert "nope.txt" in capsys.readouterr().err
    assert not out.exists()


def test_malformed_embeddings_exit_2(toy_dir, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\na 1\n")
    status = main(["--manifest", str(toy_dir / "manifest.json"), "--embeddings", str(bad), "--out", str(tmp_path / "o")])
    assert status == 2


def test_solver_error_leaves_no_output(toy_dir, tmp_path, capsys):
    status, out, report = run(toy_dir, tmp_path, "--mode", "RO", "--alpha", "0", "--gamma", "0", "--delta", "3",
                              "--export-graph", str(tmp_path / "g.txt"))
    assert status == 1
    assert "denominator" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_graph_export(toy_dir, tmp_path):
    status, _, _ = run(toy_dir, tmp_path, "--export-graph", str(tmp_path / "g.txt"))
    assert status == 0
    assert len(read_edge_list(tmp_path / "g.txt")) == 8
    assert (tmp_path / "g.txt.map").exists()


def test_oov_terms_reported(tmp_path):
    path = write_dataset(tmp_path, {"t.csv": "id,a,b\n1,known,xyzzy\n"},
                         [{"name": "t", "csv": "t.csv", "primary_key": "id", "text_columns": ["a", "b"]}])
    (tmp_path / "e.txt").write_text("1 2\nknown 1 0\n")
    cfg = PipelineConfig(path, tmp_path / "e.txt", tmp_path / "o.txt", RetrofitConfig(mode="RN"), None, tmp_path / "r.txt")
    assert run_pipeline(cfg) == 0
    entries, _ = parse_report((tmp_path / "r.txt").read_text())
    assert entries["oov_terms"] == "1" and entries["n"] == "2"
    emb = load_embeddings(tmp_path / "o.txt")
    # the null vector picked up its neighbour through the relation
    np.testing.assert_allclose(emb.vector("t.b#xyzzy"), [1.0, 0.0])


def config(toy_dir, tmp_path, **kw):
    return PipelineConfig(toy_dir / "manifest.json", toy_dir / "embeddings.txt", tmp_path / "o.txt",
                          RetrofitConfig(**kw))


def test_validate_clean_fixture(toy_dir, tmp_path):
    findings = validate(config(toy_dir, tmp_path, mode="RN"))
    assert not [f for f in findings if f.severity == "error"]
    assert not (tmp_path / "o.txt").exists()


def test_validate_convexity_warning(toy_dir, tmp_path):
    findings = validate(config(toy_dir, tmp_path, mode="RO", delta=3.0))
    warnings = [f for f in findings if f.severity == "warning"]
    assert len(warnings) == 1 and "worst term" in warnings[0].message


def test_validate_link_table_one_fk(tmp_path):
    path = write_dataset(tmp_path, {"a.csv": "id,x\n1,u\n", "l.csv": "a_id\n1\n"}, [
        {"name": "a", "csv": "a.csv", "primary_key": "id", "text_columns": ["x"]},
        {"name": "l", "csv": "l.csv", "is_link_table": True,
         "foreign_keys": [{"column": "a_id", "ref_table": "a", "ref_column": "id"}]},
    ])
    (tmp_path / "e.txt").write_text("1 1\nu 1\n")
    findings = validate(PipelineConfig(path, tmp_path / "e.txt", tmp_path / "o.txt"))
    assert any(f.severity == "error" and "exactly two foreign keys" in f.message for f in findings)


def test_validate_only_flag(toy_dir, tmp_path, capsys):
    status = main(["--manifest", str(toy_dir / "manifest.json"), "--embeddings", str(toy_dir / "embeddings.txt"),
                   "--validate-only", "--mode", "RO"])
    assert status == 0
    assert "warning" in capsys.readouterr().out


def test_bad_flag_value(toy_dir, tmp_path):
    assert main(["--manifest", "m", "--embeddings", "e", "--out", "o", "--iterations", "0"]) == 1


def test_out_required(toy_dir):
    assert main(["--manifest", str(toy_dir / "manifest.json"), "--embeddings", str(toy_dir / "embeddings.txt")]) == 1
