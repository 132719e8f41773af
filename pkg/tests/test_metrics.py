import math

import pytest

from slora.config import ALOHA, PAIRED, SLOTTED, ConfigError, SimConfig
from slora.engine import run
from slora.metrics import (
    COLUMNS,
    CSV_SCHEMA,
    Cell,
    ExperimentGrid,
    grid_from_mapping,
    load_experiment,
    read_csv,
    relative_gain,
    run_cell,
    run_grid,
    success_probability,
)

BASE = SimConfig(budget=1000)
TINY = ExperimentGrid(sf_list=(7,), payloads={7: (10,)}, t_tx_list=(60.0,), n_list=(200,), runs_per_cell=2, seed=5)


def test_relative_gain():
    assert relative_gain(0.3, 0.2) == pytest.approx(50.0)
    assert relative_gain(0.1, 0.2) == pytest.approx(-50.0)
    assert relative_gain(0.2, 0.2) == 0.0
    with pytest.raises(ZeroDivisionError):
        relative_gain(0.1, 0.0)


def test_success_probability():
    r = run(SimConfig(n_devices=100, budget=500, t_tx=60.0), 1)
    assert success_probability(r) == r.delivered / 500
    assert 0.0 <= success_probability(r) < 0.5


def test_paired_cell_rows():
    rows = run_cell(BASE, Cell(7, 10, 60.0, 200), PAIRED, 2, 5)
    assert [r["mode"] for r in rows] == [ALOHA, SLOTTED]
    a, s = rows
    assert a["status"] == s["status"] == "ok"
    assert a["config_hash"] == s["config_hash"]
    expected = relative_gain(float(s["success_prob"]), float(a["success_prob"]))
    assert float(a["success_gain_pct"]) == pytest.approx(expected, rel=1e-8)
    assert a["success_gain_pct"] == s["success_gain_pct"]


def test_single_mode_cell():
    (row,) = run_cell(BASE, Cell(7, 10, 60.0, 200), ALOHA, 1, 5)
    assert row["success_gain_pct"] == "NA" and row["success_std"] == "0"


def test_duty_cycle_cell():
    rows = run_cell(BASE, Cell(12, 51, 60.0, 200), PAIRED, 1, 5)
    assert {r["status"] for r in rows} == {"duty_cycle_exceeded"}
    assert rows[0]["success_prob"] == "NA"


def test_infeasible_cell():
    rows = run_cell(BASE.replace(t_sync=60.0), Cell(7, 10, 90.0, 200), SLOTTED, 1, 5)
    assert rows[0]["status"] == "infeasible"


def test_grid_csv(tmp_path):
    out = run_grid(TINY, tmp_path / "r.csv", BASE)
    text = out.read_text()
    lines = text.splitlines()
    assert lines[0] == f"# {CSV_SCHEMA}"
    assert lines[1] == ",".join(COLUMNS)
    rows = read_csv(text)
    assert len(rows) == 2
    for r in rows:
        assert 0.0 <= float(r["success_prob"]) <= 1.0
        assert math.isfinite(float(r["bits_per_joule"]))


def test_grid_byte_identical(tmp_path):
    a = run_grid(TINY, tmp_path / "a.csv", BASE).read_bytes()
    b = run_grid(TINY, tmp_path / "b.csv", BASE).read_bytes()
    assert a == b


def test_grid_validation():
    with pytest.raises(ConfigError):
        ExperimentGrid(t_tx_list=(90.0,)).validate(60.0)
    with pytest.raises(ConfigError):
        ExperimentGrid(payloads={7: (222,), 9: (10,), 12: (10,)}).validate()
    with pytest.raises(ConfigError):
        ExperimentGrid(mode="csma").validate()
    with pytest.raises(ConfigError):
        ExperimentGrid(sf_list=(8,)).validate()


def test_default_grid_shape():
    cells = list(ExperimentGrid().cells())
    assert len(cells) == 2 * 8 * 4
    assert ExperimentGrid().modes() == (ALOHA, SLOTTED)


def test_grid_from_mapping():
    base, grid = load_experiment(
        {"sf_list": [9], "payloads_sf9": [51], "t_tx_list": [600], "n_list": [50], "budget": 100, "seed": 3}
    )
    assert base.budget == 100
    assert list(grid.cells()) == [Cell(9, 51, 600.0, 50)]
    assert grid.seed == 3
    assert grid_from_mapping({}) == ExperimentGrid()
