import json
import math
from fractions import Fraction
from pathlib import Path

import pytest

from fuseplan import cli
from fuseplan.fusion_graph import build_graph, overhead_factor, path_peak_ram, path_total_macs
from fuseplan.model_ir import parse_model, serialize_model

MODELS = Path(__file__).resolve().parents[1] / "models"


@pytest.fixture
def toy3_path(tmp_path, toy3):
    path = tmp_path / "toy3.json"
    path.write_text(serialize_model(toy3))
    return str(path)


# --- argument parsing ------------------------------------------------------

def test_parse_size():
    assert cli.parse_size("2048") == 2048
    assert cli.parse_size("16kB") == 16000
    assert cli.parse_size("1.5kb") == 1500
    assert cli.parse_size("1GB") == 10**9
    assert cli.parse_size("inf") == math.inf
    with pytest.raises(ValueError):
        cli.parse_size("0")
    with pytest.raises(ValueError):
        cli.parse_size("lots")


def test_parse_factor():
    assert cli.parse_factor("1.3") == Fraction(13, 10)
    assert cli.parse_factor("inf") == math.inf
    with pytest.raises(ValueError):
        cli.parse_factor("0.9")


# --- plan ------------------------------------------------------------------

def test_plan_slack_ram_cap_emits_mac_minimum(toy3_path, capsys):
    assert cli.main(["plan", toy3_path, "--p2", "1GB"]) == 0
    out = capsys.readouterr().out
    assert "total MACs: 1044" in out
    assert "overhead factor F: 1 " in out


def test_plan_one_byte_cap_has_no_solution(toy3_path, capsys):
    assert cli.main(["plan", toy3_path, "--p2", "1"]) == 2
    assert "no solution" in capsys.readouterr().err


def test_plan_unconstrained_p1_matches_minimax(toy3_path, capsys):
    assert cli.main(["plan", toy3_path, "--p1", "inf", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == 1
    assert doc["peak_ram_bytes"] == 140
    assert doc["segments"] == [{"start": 0, "end": 3, "fused": True}]
    assert doc["overhead_factor"] == "62/29"  # 2232/1044 reduced


def test_plan_rejects_missing_or_invalid_input(tmp_path, capsys):
    assert cli.main(["plan", str(tmp_path / "nope.json"), "--p1", "inf"]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["plan", str(bad), "--p1", "inf"]) == 1


def test_plan_graph_dump(toy3_path, tmp_path, capsys):
    dump = tmp_path / "graph.json"
    assert cli.main(["plan", toy3_path, "--p1", "inf", "--graph-dump", str(dump)]) == 0
    doc = json.loads(dump.read_text())
    assert doc["vanilla_macs"] == 1044
    assert len(doc["edges"]) == 6


def test_element_bytes_override_scales_ram(toy3_path, capsys):
    assert cli.main(["plan", toy3_path, "--p1", "inf", "--format", "json",
                     "--element-bytes", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["peak_ram_bytes"] == 280


# --- sweep -----------------------------------------------------------------

def test_sweep_table_has_baselines_and_saa(toy3_path, capsys):
    assert cli.main(["sweep", toy3_path, "--p1-grid", "1.1,1.2,inf"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert any(line.startswith("| Vanilla | 0.164 | 1 ") for line in out)
    assert any(line.startswith("| Heuristic | 0.140 ") for line in out)
    assert any(line.startswith("| P1:F_max=1.10 | 0.164 | 1 ") for line in out)
    assert any(line.startswith("| P1:F_max=1.20 | (SAA)") for line in out)
    assert any(line.startswith("| P1:F_max=inf | 0.140 | 2.14 ") for line in out)


def test_sweep_renders_no_solution_rows(toy3_path, capsys):
    assert cli.main(["sweep", toy3_path, "--p2-grid", "1,1kB"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert any(line.startswith("| P2:P_max=0.001kB | (No Solution)") for line in out)
    assert any(line.startswith("| P2:P_max=1.000kB | 0.164 | 1 ") for line in out)


def test_sweep_without_grid_is_an_error(toy3_path, capsys):
    assert cli.main(["sweep", toy3_path]) == 1


def test_sweep_csv_is_byte_deterministic(toy3_path, capsys):
    argv = ["sweep", toy3_path, "--p1-grid", "1.1,1.7,inf", "--p2-grid", "16kB",
            "--format", "csv"]
    assert cli.main(argv) == 0
    first = capsys.readouterr().out
    assert cli.main(argv) == 0
    assert capsys.readouterr().out == first
    assert first.splitlines()[0] == "label,ram_kb,F,status"


def test_sweep_json_rows_recompute(toy3_path, capsys, toy3):
    assert cli.main(["sweep", toy3_path, "--p1-grid", "1.7", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    row = next(r for r in doc["rows"] if r["label"] == "P1:F_max=1.70")
    graph = build_graph(toy3)
    # frozen toy3 candidate: [(0,2),(2,3)] with peak 145
    assert row["ram_kb"] == "0.145"


# --- verify ----------------------------------------------------------------

def test_verify_model_file_passes(toy3_path, capsys):
    assert cli.main(["verify", toy3_path]) == 0
    assert "PASS" in capsys.readouterr().out


def test_verify_random_models_pass(capsys):
    assert cli.main(["verify", "--random", "3", "--depth", "4"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_verify_depth_guard(capsys):
    assert cli.main(["verify", "--depth", "30"]) == 3
    assert "guard" in capsys.readouterr().err


def test_verify_rejects_huge_model_files(capsys):
    assert cli.main(["verify", str(MODELS / "mbv2_w035_144.json")]) == 3


# --- export ----------------------------------------------------------------

def test_export_round_trips_and_is_deterministic(toy3_path, tmp_path, toy3):
    out = tmp_path / "setting.json"
    assert cli.main(["export", toy3_path, "--p1", "inf", "--out", str(out)]) == 0
    first = out.read_text()
    doc = json.loads(first)
    graph = build_graph(toy3)
    by_span = {e.span: e for e in graph.edges}
    setting = tuple(by_span[(s["start"], s["end"])] for s in doc["segments"])
    # stored numbers match recomputation from the stored segments
    assert doc["peak_ram_bytes"] == path_peak_ram(setting)
    assert doc["total_macs"] == path_total_macs(setting)
    f = overhead_factor(setting, graph)
    assert doc["overhead_factor"] == f"{f.numerator}/{f.denominator}"
    # segments cover the layer range exactly
    covered = [i for s in doc["segments"] for i in range(s["start"], s["end"])]
    assert covered == list(range(len(toy3.layers)))
    assert cli.main(["export", toy3_path, "--p1", "inf", "--out", str(out)]) == 0
    assert out.read_text() == first


def test_export_no_solution_exit_code(toy3_path, tmp_path, capsys):
    out = tmp_path / "setting.json"
    assert cli.main(["export", toy3_path, "--p2", "1", "--out", str(out)]) == 2
    assert not out.exists()
