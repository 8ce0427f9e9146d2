# tests/test_cli.py
import json

import pytest

from network.trace import Trace
from scripts.harness import SWEEP_COLUMNS
from scripts.run_sim import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main


def _write(path, data) -> str:
    path.write_text(json.dumps(data) if not isinstance(data, str) else data, encoding="utf-8")
    return str(path)


@pytest.fixture
def rec_config(tmp_path):
    return _write(tmp_path / "rec.json", {"name": "rec", "protocol": "REC", "n": 4, "t": 1, "ell": 16})


def test_run_writes_trace_and_audit(tmp_path, rec_config):
    out = tmp_path / "out"
    assert main(["run", "--config", rec_config, "--out-dir", str(out)]) == EXIT_OK
    assert (out / "rec-seed0.jsonl").is_file()
    audit = json.loads((out / "rec-seed0.audit.json").read_text(encoding="utf-8"))
    assert audit["ok"] is True


def test_run_is_byte_deterministic(tmp_path, rec_config):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["run", "--config", rec_config, "--seed", "5", "--out-dir", str(out)]) == EXIT_OK
    assert (a / "rec-seed5.jsonl").read_bytes() == (b / "rec-seed5.jsonl").read_bytes()


def test_audit_verb_rewrites_report(tmp_path, rec_config):
    out = tmp_path / "out"
    main(["run", "--config", rec_config, "--out-dir", str(out)])
    assert main(["audit", str(out / "rec-seed0.jsonl"), "--out-dir", str(out)]) == EXIT_OK
    rows = json.loads((out / "rec-seed0.reaudit.json").read_text(encoding="utf-8"))
    assert rows and all(r["ok"] for r in rows)


@pytest.mark.parametrize("content", [
    '{"protocol": "REC", "n": 4,',
    {"protocol": "REC", "n": 3, "t": 1},
    {"protocol": "REC", "n": 4, "t": 1, "colour": "red"},
])
def test_config_errors_exit_2(tmp_path, content):
    cfg = _write(tmp_path / "bad.json", content)
    assert main(["run", "--config", cfg, "--out-dir", str(tmp_path)]) == EXIT_CONFIG


def test_missing_config_exit_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.json"), "--out-dir", str(tmp_path)]) == EXIT_CONFIG


def test_empty_sweep_writes_header_only(tmp_path):
    cfg = _write(tmp_path / "grid.json", {"base": {"protocol": "REC", "n": 4, "t": 1, "ell": 16}, "n": []})
    out = tmp_path / "out"
    assert main(["sweep", "--config", cfg, "--out-dir", str(out)]) == EXIT_OK
    lines = (out / "sweep.csv").read_text(encoding="utf-8").splitlines()
    assert lines == [",".join(SWEEP_COLUMNS)]


def test_small_sweep(tmp_path):
    cfg = _write(tmp_path / "grid.json", {
        "base": {"name": "g", "protocol": "REC", "n": 4, "t": 1, "ell": 16}, "n": [4, 7]})
    out = tmp_path / "out"
    assert main(["sweep", "--config", cfg, "--out-dir", str(out), "--no-traces"]) == EXIT_OK
    lines = (out / "sweep.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3
    assert (out / "fits.json").is_file()
    assert not (out / "traces").exists()


def test_lemma_verb(tmp_path):
    assert main(["lemma", "--max-vertices", "3", "--out-dir", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "lemma.json").read_text(encoding="utf-8"))
    assert report["violations"] == []
    assert report["graphs"] > 0


def test_overrides_reach_trace_header(tmp_path):
    cfg = _write(tmp_path / "ext.json", {"name": "ext", "protocol": "EXT", "n": 4, "t": 1, "ell": 16})
    out = tmp_path / "out"
    code = main(["run", "--config", cfg, "--fairness-K", "40", "--ba-backend", "coin", "--out-dir", str(out)])
    assert code == EXIT_OK
    header = Trace.read(out / "ext-seed0.jsonl").header
    assert header["fairness_k"] == 40
    assert header["scenario"]["ba_backend"] == "coin"


def test_golden_update_then_compare(tmp_path, rec_config):
    golden, out = tmp_path / "golden", tmp_path / "out"
    args = ["run", "--config", rec_config, "--out-dir", str(out), "--golden", str(golden)]
    assert main(args + ["--update-golden"]) == EXIT_OK
    assert main(args) == EXIT_OK
    target = golden / "rec-seed0.jsonl"
    target.write_text(target.read_text(encoding="utf-8") + "\n", encoding="utf-8")
    assert main(args) == EXIT_FAIL
