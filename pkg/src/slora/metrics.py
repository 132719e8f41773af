"""Experiment grids, derived metrics, and the results CSV."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Mapping

from .config import ALOHA, MAX_PAYLOAD, PAIRED, SLOTTED, ConfigError, SimConfig, config_from_mapping
from .engine import RunReport, aggregate, run, run_paired
from .phy import FrameParams, time_on_air

logger = logging.getLogger(__name__)

CSV_SCHEMA = "slora-metrics v1"
COLUMNS = (
    "sf",
    "payload_bytes",
    "t_tx_s",
    "n_devices",
    "mode",
    "success_prob",
    "success_std",
    "bits_per_joule",
    "efficiency_std",
    "success_gain_pct",
    "efficiency_gain_pct",
    "status",
    "config_hash",
)
NA = "NA"

DEFAULT_PAYLOADS = {7: (10, 51, 221), 9: (10, 51, 115), 12: (10, 51)}
DEFAULT_T_TX = (60.0, 600.0, 1800.0, 5400.0)


def success_probability(report: RunReport) -> float:
    return report.success_probability


def relative_gain(slora_value: float, lorawan_value: float) -> float:
    """Percentage change of the slotted value over the ALOHA baseline."""
    if lorawan_value <= 0:
        raise ZeroDivisionError("relative gain undefined for a non-positive baseline")
    return 100.0 * (slora_value - lorawan_value) / lorawan_value


@dataclass(frozen=True)
class Cell:
    sf: int
    payload_bytes: int
    t_tx: float
    n_devices: int


@dataclass(frozen=True)
class ExperimentGrid:
    sf_list: tuple[int, ...] = (7, 9, 12)
    payloads: Mapping[int, tuple[int, ...]] = field(default_factory=lambda: dict(DEFAULT_PAYLOADS))
    t_tx_list: tuple[float, ...] = DEFAULT_T_TX
    n_list: tuple[int, ...] = (5000, 10000)
    mode: str = PAIRED
    runs_per_cell: int = 10
    seed: int = 1

    def validate(self, t_sync: float = 60.0) -> "ExperimentGrid":
        if self.mode not in (ALOHA, SLOTTED, PAIRED):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.runs_per_cell < 1:
            raise ConfigError("runs_per_cell must be >= 1")
        for sf in self.sf_list:
            if sf not in self.payloads:
                raise ConfigError(f"no payload list for SF{sf}")
            for pl in self.payloads[sf]:
                if not 1 <= pl <= MAX_PAYLOAD[sf]:
                    raise ConfigError(f"payload {pl} B exceeds SF{sf} maximum {MAX_PAYLOAD[sf]} B")
        for t in self.t_tx_list:
            ratio = t / t_sync
            if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-9:
                raise ConfigError(f"t_tx={t} s is not a multiple of {t_sync} s")
        for n in self.n_list:
            if n < 1:
                raise ConfigError("device counts must be >= 1")
        return self

    def cells(self) -> Iterator[Cell]:
        for n in self.n_list:
            for sf in self.sf_list:
                for pl in self.payloads[sf]:
                    for t in self.t_tx_list:
                        yield Cell(sf, pl, float(t), n)

    def modes(self) -> tuple[str, ...]:
        return (ALOHA, SLOTTED) if self.mode == PAIRED else (self.mode,)


def grid_from_mapping(values: Mapping[str, Any], base: ExperimentGrid | None = None) -> ExperimentGrid:
    base = base or ExperimentGrid()
    sf_list = tuple(int(s) for s in values.get("sf_list", base.sf_list))
    payloads = dict(base.payloads)
    for key, value in values.items():
        if key.startswith("payloads_sf"):
            payloads[int(key[len("payloads_sf"):])] = tuple(int(p) for p in value)
    return ExperimentGrid(
        sf_list=sf_list,
        payloads=payloads,
        t_tx_list=tuple(float(t) for t in values.get("t_tx_list", base.t_tx_list)),
        n_list=tuple(int(n) for n in values.get("n_list", base.n_list)),
        mode=str(values.get("mode", base.mode)),
        runs_per_cell=int(values.get("runs_per_cell", base.runs_per_cell)),
        seed=int(values.get("seed", base.seed)),
    )


def cell_config(base: SimConfig, cell: Cell, mode: str) -> SimConfig:
    return base.replace(
        sf=cell.sf, payload_bytes=cell.payload_bytes, t_tx=cell.t_tx, n_devices=cell.n_devices, mac_mode=mode
    )


def _fmt(x: float | None) -> str:
    if x is None or not math.isfinite(x):
        return NA
    return format(x, ".10g")


def _gain(a: float, b: float) -> float | None:
    try:
        return relative_gain(a, b)
    except ZeroDivisionError:
        return None


def run_cell(base: SimConfig, cell: Cell, mode: str, runs: int, seed: int) -> list[dict[str, str]]:
    """Simulate one grid cell; returns one CSV row per MAC mode."""
    modes = (ALOHA, SLOTTED) if mode == PAIRED else (mode,)
    head = {"sf": str(cell.sf), "payload_bytes": str(cell.payload_bytes), "t_tx_s": _fmt(cell.t_tx), "n_devices": str(cell.n_devices)}
    cfg = cell_config(base, cell, modes[0])
    config_hash = cfg.digest(exclude=("mac_mode",))

    def failed(status: str) -> list[dict[str, str]]:
        return [
            {**head, "mode": m, **{c: NA for c in COLUMNS[5:11]}, "status": status, "config_hash": config_hash}
            for m in modes
        ]

    try:
        cfg.validate()
        toa = time_on_air(FrameParams.from_config(cfg))
        if toa / cell.t_tx > base.duty_cycle:
            return failed("duty_cycle_exceeded")
        reports: dict[str, list[RunReport]] = {m: [] for m in modes}
        for r in range(runs):
            if mode == PAIRED:
                a, s = run_paired(cfg, seed + r)
                reports[ALOHA].append(a)
                reports[SLOTTED].append(s)
            else:
                reports[mode].append(run(cfg, seed + r))
    except ConfigError as exc:
        logger.warning("cell %s infeasible: %s", cell, exc)
        return failed("infeasible")
    except Exception:
        logger.exception("cell %s failed", cell)
        return failed("runtime_error")

    agg = {m: aggregate(reports[m]) for m in modes}
    s_gain = e_gain = None
    status = "ok"
    if mode == PAIRED:
        s_gain = _gain(agg[SLOTTED].success_mean, agg[ALOHA].success_mean)
        e_gain = _gain(agg[SLOTTED].efficiency_mean, agg[ALOHA].efficiency_mean)
        if s_gain is None or e_gain is None:
            status = "undefined_gain"
    rows = []
    for m in modes:
        rows.append(
            {
                **head,
                "mode": m,
                "success_prob": _fmt(agg[m].success_mean),
                "success_std": _fmt(agg[m].success_std),
                "bits_per_joule": _fmt(agg[m].efficiency_mean),
                "efficiency_std": _fmt(agg[m].efficiency_std),
                "success_gain_pct": _fmt(s_gain),
                "efficiency_gain_pct": _fmt(e_gain),
                "status": status,
                "config_hash": config_hash,
            }
        )
    return rows


def _run_cell_args(args):
    return run_cell(*args)


def run_grid_rows(grid: ExperimentGrid, base: SimConfig, workers: int = 1) -> list[dict[str, str]]:
    grid.validate(base.t_sync)
    cells = list(grid.cells())
    jobs = [(base, c, grid.mode, grid.runs_per_cell, grid.seed) for c in cells]
    rows: list[dict[str, str]] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, cell_rows in enumerate(pool.map(_run_cell_args, jobs)):
                rows.extend(cell_rows)
                logger.info("cell %d/%d done: %s", i + 1, len(cells), cells[i])
    else:
        for i, job in enumerate(jobs):
            rows.extend(run_cell(*job))
            logger.info("cell %d/%d done: %s", i + 1, len(cells), cells[i])
    return rows


def rows_to_csv(rows: list[dict[str, str]]) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_SCHEMA}\n")
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def read_csv(text: str) -> list[dict[str, str]]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def run_grid(grid: ExperimentGrid, out_path: str | Path, base: SimConfig | None = None, workers: int = 1) -> Path:
    base = base or SimConfig()
    text = rows_to_csv(run_grid_rows(grid, base, workers))
    out = Path(out_path)
    try:
        out.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
    return out


def load_experiment(values: Mapping[str, Any]) -> tuple[SimConfig, ExperimentGrid]:
    base = config_from_mapping(values)
    grid = grid_from_mapping(values)
    return base, grid
