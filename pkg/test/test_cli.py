"""
End-to-end tests of the command-line interface.
"""

import json

import pandas as pd
import pytest
from sqlalchemy import create_engine, text

from conftest import StreamBuilder
from app.cli.main import main
from app.codec import encode_text
from app.core.models import OP_RETURN, TxOutputDecl

RUN_ARTIFACTS = {
    "clusters.csv",
    "summary.json",
    "window_counts.csv",
    "ratios.csv",
    "size_histogram.csv",
    "merge_quantiles.csv",
    "superclusters.json",
    "flagged_transactions.csv",
    "flagged_clusters.csv",
    "flows.dot",
    "flows.graphml",
    "flows.json",
}

ANALYSIS_FLAGS = [
    "--window", "500",
    "--quantile-window", "1000",
    "--supercluster-min", "20",
    "--large-threshold", "15",
    "--top-n", "5",
]


@pytest.fixture(scope="module")
def stream_file(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    code = main([
        "synth", "--seed", "5", "--num-transactions", "3000", "--p-reuse", "0.0",
        "--mean-inputs", "2", "--large-merge-count", "1", "--large-merge-size", "20",
        "--out", str(out),
    ])
    assert code == 0
    return out / "synthetic.jsonl"


def _contents(directory):
    return {path.name: path.read_bytes() for path in sorted(directory.iterdir())}


def test_synth_writes_stream_and_injections(stream_file):
    assert len(stream_file.read_bytes().splitlines()) == 3000
    injected = (stream_file.parent / "injected_ordinals.txt").read_text().split()
    assert injected == ["1503"]


def test_run_writes_every_artifact(stream_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--input", str(stream_file), "--out", str(out), *ANALYSIS_FLAGS]) == 0
    names = {path.name for path in out.iterdir()}
    assert RUN_ARTIFACTS <= names
    assert any(name.startswith("structure_") and name.endswith(".dot") for name in names)

    stats = json.loads((out / "summary.json").read_text())
    assert stats["transactions"] == 3000
    assert "clustering rate" in capsys.readouterr().out

    flagged = pd.read_csv(out / "flagged_transactions.csv")
    assert flagged["ordinal"].tolist() == [1503]
    clusters = pd.read_csv(out / "flagged_clusters.csv")
    assert clusters["event_ordinal"].tolist() == [1503]

    counts = pd.read_csv(out / "window_counts.csv")
    assert counts["window_end"].tolist() == [500, 1000, 1500, 2000, 2500, 3000]
    quantiles = pd.read_csv(out / "merge_quantiles.csv")
    assert quantiles.columns.tolist() == ["window_index", "n", "q100", "q1000", "q10000", "q100000"]


def test_identical_runs_are_byte_identical(stream_file, tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--input", str(stream_file), "--out", str(first), *ANALYSIS_FLAGS]) == 0
    assert main(["run", "--input", str(stream_file), "--out", str(second), *ANALYSIS_FLAGS]) == 0
    assert _contents(first) == _contents(second)


def test_resume_matches_one_shot(stream_file, tmp_path):
    lines = stream_file.read_bytes().splitlines(keepends=True)
    head, tail = tmp_path / "head.jsonl", tmp_path / "tail.jsonl"
    head.write_bytes(b"".join(lines[:1234]))
    tail.write_bytes(b"".join(lines[1234:]))
    snap = tmp_path / "head.acsn"

    assert main(["snapshot", "--input", str(head), "--snapshot", str(snap)]) == 0
    assert main(["resume", "--snapshot", str(snap), "--input", str(tail), "--out", str(tmp_path / "resumed"), *ANALYSIS_FLAGS]) == 0
    assert main(["run", "--input", str(stream_file), "--out", str(tmp_path / "whole"), *ANALYSIS_FLAGS]) == 0
    assert _contents(tmp_path / "resumed") == _contents(tmp_path / "whole")


def test_split_inputs_continue_ordinals(stream_file, tmp_path):
    lines = stream_file.read_bytes().splitlines(keepends=True)
    parts = []
    for i, chunk in enumerate((lines[:1000], lines[1000:])):
        part = tmp_path / f"part{i}.jsonl"
        part.write_bytes(b"".join(chunk))
        parts.extend(["--input", str(part)])
    assert main(["run", *parts, "--out", str(tmp_path / "parts"), *ANALYSIS_FLAGS]) == 0
    assert main(["run", "--input", str(stream_file), "--out", str(tmp_path / "whole"), *ANALYSIS_FLAGS]) == 0
    assert _contents(tmp_path / "parts") == _contents(tmp_path / "whole")


def test_missing_input_exits_3_without_output(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--input", str(tmp_path / "absent.jsonl"), "--out", str(out)]) == 3
    assert not out.exists()


def test_bad_record_exits_4_without_output(stream_file, tmp_path):
    broken = tmp_path / "broken.jsonl"
    broken.write_bytes(stream_file.read_bytes()[:5000] + b"\n{oops\n")
    out = tmp_path / "out"
    assert main(["run", "--input", str(broken), "--out", str(out)]) == 4
    assert not out.exists()
    assert not list(tmp_path.glob(".out-*"))


def test_invalid_flag_value_exits_2(stream_file, tmp_path):
    assert main(["quantiles", "--input", str(stream_file), "--q", "1", "--out", str(tmp_path / "q")]) == 2


def test_config_file_and_flag_precedence(stream_file, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"inputs": [str(stream_file)], "window": 100}))

    assert main(["metrics", "--config", str(config), "--out", str(tmp_path / "from_file")]) == 0
    assert pd.read_csv(tmp_path / "from_file" / "window_counts.csv")["window_end"].iloc[0] == 100

    assert main(["metrics", "--config", str(config), "--window", "250", "--out", str(tmp_path / "flag")]) == 0
    assert pd.read_csv(tmp_path / "flag" / "window_counts.csv")["window_end"].iloc[0] == 250


def test_synthetic_format_needs_no_input(tmp_path):
    out = tmp_path / "out"
    assert main(["histogram", "--format", "synthetic", "--num-transactions", "400", "--p-reuse", "0.2", "--out", str(out)]) == 0
    histogram = pd.read_csv(out / "size_histogram.csv")
    assert histogram.columns.tolist() == ["bin_low", "bin_high", "clusters"]


def test_empty_stream_run(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_bytes(b"")
    out = tmp_path / "out"
    assert main(["run", "--input", str(empty), "--out", str(out)]) == 0
    names = {path.name for path in out.iterdir()}
    assert "flagged_transactions.csv" not in names
    assert json.loads((out / "summary.json").read_text())["transactions"] == 0


def test_run_on_stream_without_addresses(tmp_path):
    builder = StreamBuilder()
    builder.coinbase(TxOutputDecl(0, OP_RETURN, ()))
    stream = tmp_path / "no_addresses.jsonl"
    stream.write_bytes(encode_text(builder.records))

    out = tmp_path / "out"
    assert main(["run", "--input", str(stream), "--out", str(out)]) == 0
    names = {path.name for path in out.iterdir()}
    assert "flagged_transactions.csv" in names
    assert not any(name.startswith("structure_") for name in names)
    assert json.loads((out / "summary.json").read_text())["addresses"] == 0

    # drawing a cluster needs one to exist
    assert main(["structure", "--input", str(stream), "--out", str(tmp_path / "structure")]) == 6
    assert not (tmp_path / "structure").exists()


def test_ingest_check(stream_file, capsys):
    assert main(["ingest-check", "--input", str(stream_file)]) == 0
    assert "3000 records parsed and validated" in capsys.readouterr().out


def test_binary_emit_and_run(tmp_path):
    synth_out = tmp_path / "synth"
    assert main(["synth", "--emit-format", "binary", "--num-transactions", "300", "--out", str(synth_out)]) == 0
    out = tmp_path / "out"
    assert main(["cluster", "--format", "binary", "--input", str(synth_out / "synthetic.bin"), "--out", str(out)]) == 0
    assert json.loads((out / "summary.json").read_text())["transactions"] == 300


def test_export_db(stream_file, tmp_path):
    url = f"sqlite:///{tmp_path / 'results.db'}"
    assert main(["export-db", "--input", str(stream_file), "--database-url", url]) == 0
    with create_engine(url).connect() as conn:
        events = conn.execute(text("SELECT count(*) FROM merge_events")).scalar()
        clusters = conn.execute(text("SELECT count(*) FROM clusters WHERE size >= 2")).scalar()
    assert events > 0
    assert clusters > 0
