"""Command-line surface: outputs, determinism, validation, exit codes."""
import json

import numpy as np
import pytest

from qknn_sim.cli import CSV_HEADER, main, parse_config_file


def run_cli(args):
    return main(args)


def test_gen_data_counts_and_byte_determinism(tmp_path, capsys):
    out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run_cli(["gen-data", "--scheme", "2q-sep-vs-ent", "--per-class", "20",
                    "--seed", "9", "--out", str(out1)]) == 0
    printed = capsys.readouterr().out
    assert "separable: 20" in printed and "entangled: 20" in printed
    assert run_cli(["gen-data", "--scheme", "2q-sep-vs-ent", "--per-class", "20",
                    "--seed", "9", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_gen_data_bad_output_path_exits_1(capsys):
    code = main(["gen-data", "--per-class", "5", "--scheme", "2q-sep-vs-ent",
                 "--out", "/nonexistent-dir/x.jsonl"])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_gen_data_rejects_unknown_scheme():
    with pytest.raises(SystemExit):
        main(["gen-data", "--scheme", "4q-magic"])


def _make_corpus(tmp_path, scheme="2q-sep-vs-maxent", per_class=40, seed=3):
    path = tmp_path / "corpus.jsonl"
    assert run_cli(["gen-data", "--scheme", scheme, "--per-class", str(per_class),
                    "--seed", str(seed), "--out", str(path)]) == 0
    return path


def test_classify_classical_output_format(tmp_path, capsys):
    corpus = _make_corpus(tmp_path)
    out = tmp_path / "result.csv"
    assert run_cli(["classify", "--corpus", str(corpus), "--mode", "classical",
                    "--k", "3", "--b", "12", "--seed", "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1] == "test_id,true_label,predicted,queries,mode"
    assert lines[-1].startswith("# accuracy=")
    assert "accuracy:" in capsys.readouterr().out
    for row in lines[2:-1]:
        fields = row.split(",")
        assert len(fields) == 5 and fields[4] == "classical"


def test_classify_modes_agree_on_quantized_table(tmp_path):
    corpus = _make_corpus(tmp_path, per_class=30)
    out_c = tmp_path / "classical.csv"
    out_q = tmp_path / "quantum.csv"
    common = ["--corpus", str(corpus), "--k", "3", "--b", "12", "--seed", "4"]
    assert run_cli(["classify", *common, "--mode", "classical", "--out", str(out_c)]) == 0
    assert run_cli(["classify", *common, "--mode", "oracle-abstract",
                    "--out", str(out_q)]) == 0

    def predictions(path):
        rows = [l for l in path.read_text().splitlines()
                if l and not l.startswith("#") and not l.startswith("test_id")]
        return {r.split(",")[0]: r.split(",")[2] for r in rows}

    assert predictions(out_c) == predictions(out_q)


def test_classify_k_larger_than_train_exits_1(tmp_path, capsys):
    corpus = _make_corpus(tmp_path, per_class=3)
    code = run_cli(["classify", "--corpus", str(corpus), "--k", "50",
                    "--mode", "classical", "--seed", "0"])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_classify_missing_corpus_exits_1(capsys):
    assert run_cli(["classify", "--corpus", "/does/not/exist.jsonl"]) == 1


def test_verify_report_is_valid_json_and_passes(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert run_cli(["verify", "--seed", "0", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["all_pass"] is True
    names = {c["name"] for c in report["invariants"]}
    assert "swap_test_probability_law" in names
    assert all("max_deviation" in c and "tolerance" in c for c in report["invariants"])


def test_verify_fault_injection_fails_named_invariant(tmp_path):
    out = tmp_path / "report.json"
    code = run_cli(["verify", "--seed", "0", "--inject-fault", "comparator",
                    "--out", str(out)])
    assert code == 3
    report = json.loads(out.read_text())
    failing = [c["name"] for c in report["invariants"] if not c["pass"]]
    assert failing == ["comparator_J_exhaustive_b3"]


def test_bench_csv_and_determinism(tmp_path):
    out1, out2 = tmp_path / "b1.csv", tmp_path / "b2.csv"
    args = ["bench", "--M", "16,32", "--k", "1", "--trials", "20", "--seed", "5"]
    assert run_cli([*args, "--out", str(out1)]) == 0
    assert run_cli([*args, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1].startswith("M,k,trials,")
    assert any(l.startswith("# fitted_slope_to_solution=") for l in lines)


def test_discriminate_csv(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert run_cli(["discriminate", "--M", "8", "--n", "2", "--trials", "10",
                    "--seed", "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER and lines[1].startswith("M,n,trials,")
    fields = lines[2].split(",")
    assert fields[0] == "8" and float(fields[3]) == 1.0


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# experiment defaults\nper-class = 7\nseed = 11\n")
    out = tmp_path / "c.jsonl"
    assert run_cli(["gen-data", "--scheme", "2q-sep-vs-ent", "--config", str(cfg),
                    "--out", str(out)]) == 0
    assert "separable: 7" in capsys.readouterr().out
    # flag overrides the file
    assert run_cli(["gen-data", "--scheme", "2q-sep-vs-ent", "--config", str(cfg),
                    "--per-class", "4", "--out", str(out)]) == 0
    assert "separable: 4" in capsys.readouterr().out


def test_config_file_parser_rejects_garbage(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("this is not a key value line\n")
    assert parse_config_file.__name__ == "parse_config_file"
    code = run_cli(["gen-data", "--scheme", "2q-sep-vs-ent", "--config", str(cfg)])
    assert code == 1


def test_bench_emits_per_trial_traces(tmp_path):
    out = tmp_path / "bench.csv"
    assert run_cli(["bench", "--M", "16", "--k", "2", "--trials", "5",
                    "--seed", "2", "--out", str(out)]) == 0
    traces = (tmp_path / "bench.csv.traces.jsonl").read_text().splitlines()
    assert len(traces) == 5
    for line in traces:
        obj = json.loads(line)
        assert set(obj) == {"seed", "M", "k", "rounds", "oracle_queries", "top_k"}
