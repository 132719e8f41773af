"""Acceptance criteria, each checked at its stated tolerance.

Every test records a PASS/FAIL line (printed immediately and again in the
terminal summary) before asserting.
"""

import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import VERDICTS
from slora.config import ALOHA, PAIRED, SLOTTED, SimConfig
from slora.engine import run
from slora.metrics import Cell, ExperimentGrid, rows_to_csv, run_cell, run_grid_rows
from slora.phy import FrameParams, time_on_air
from slora.scenario import sample_radii
from slora.timing import (
    ct_detection_uncertainty,
    propagation_stats,
    sample_timing_offset,
    transmission_clock_uncertainty,
    transmission_clock_uncertainty_approx,
)


def verdict(label: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
    VERDICTS.append(line)
    print(line, file=sys.__stdout__, flush=True)
    assert ok, line


def test_criterion_1_detection_uncertainty():
    t0 = time.perf_counter()
    u = ct_detection_uncertainty(0.41e-3, 0.24e-3)
    elapsed = time.perf_counter() - t0
    two_sig = float(f"{u * 1e3:.2g}")
    verdict("1 CT detection uncertainty", two_sig == 0.34 and elapsed < 1e-3, f"u_t0s={u * 1e3:.4f} ms in {elapsed * 1e6:.1f} us")


def test_criterion_2_propagation_moments():
    v = 3e8
    stats = propagation_stats(0.0, 1500.0, v)
    delays = sample_radii(np.random.default_rng(2024), 10_000_000, 0.0, 1500.0) / v
    mu_err = abs(delays.mean() - stats.mu_pd) / stats.mu_pd
    sd_err = abs(delays.std() - stats.sigma_pd) / stats.sigma_pd
    ok = mu_err <= 0.005 and sd_err <= 0.005 and round(stats.mu_pd * 1e6, 3) == 3.333 and round(stats.sigma_pd * 1e6, 3) == 1.179
    verdict(
        "2 propagation moments",
        ok,
        f"mu={stats.mu_pd * 1e6:.3f} us (MC err {mu_err:.2e}), sigma={stats.sigma_pd * 1e6:.3f} us (MC err {sd_err:.2e})",
    )


def test_criterion_3_clock_approximation():
    errs = {}
    for k in (10, 30, 90):
        exact = transmission_clock_uncertainty(k, 30.5e-6, 0.34e-3)
        errs[k] = abs(exact - transmission_clock_uncertainty_approx(k, 0.34e-3)) / exact
    detail = ", ".join(f"k={k}: {e:.2%}" for k, e in errs.items())
    verdict("3 large-k clock approximation", max(errs.values()) <= 0.03, detail)


def airtime_oracle(sf: int, payload: int) -> Fraction:
    """Standalone SX1272 airtime for the reference frame: 125 kHz, CR 4/8, 8-symbol preamble, explicit header, CRC."""
    bw, cr, npre = 125_000, 4, 8
    de = 1 if Fraction(2**sf, bw) > Fraction(16, 1000) else 0
    num = 8 * payload - 4 * sf + 28 + 16
    den = 4 * (sf - 2 * de)
    n_payload = 8 + max(-(-num // den) * (cr + 4), 0)
    return (npre + Fraction(17, 4) + n_payload) * Fraction(2**sf, bw)


def test_criterion_4_time_on_air():
    combos = [(7, 10), (7, 51), (7, 221), (9, 10), (9, 51), (9, 115), (12, 10), (12, 51)]
    bad = []
    for sf, pl in combos:
        got = time_on_air(FrameParams(sf, payload_bytes=pl))
        if got != float(airtime_oracle(sf, pl)):
            bad.append((sf, pl, got))
    ref = float(airtime_oracle(7, 10)) * 1e3, float(airtime_oracle(12, 51)) * 1e3
    verdict("4 time on air", not bad, f"8 combinations, SF7/10B={ref[0]:.3f} ms, SF12/51B={ref[1]:.3f} ms, mismatches={bad}")


def test_criterion_5_mac_oracles():
    cfg = SimConfig(n_devices=200, budget=2000, t_tx=60.0, ideal_channel=True, ideal_timing=True)
    t0 = time.perf_counter()
    s = run(cfg.replace(mac_mode=SLOTTED), seed=1)
    a = run(cfg.replace(mac_mode=ALOHA), seed=1)
    elapsed = time.perf_counter() - t0
    n = cfg.n_devices
    p_s = (1 - 1 / s.schedule.m_slots) ** (n - 1)
    p_a = math.exp(-2 * n * a.toa / cfg.t_tx)
    sig_s = math.sqrt(p_s * (1 - p_s) / s.generated)
    sig_a = math.sqrt(p_a * (1 - p_a) / a.generated)
    z_s = (s.success_probability - p_s) / sig_s
    z_a = (a.success_probability - p_a) / sig_a
    ok = abs(z_s) <= 3 and abs(z_a) <= 3 and elapsed < 5.0
    verdict(
        "5 analytic MAC oracles",
        ok,
        f"slotted {s.success_probability:.4f} vs {p_s:.4f} (z={z_s:+.2f}), "
        f"ALOHA {a.success_probability:.4f} vs {p_a:.4f} (z={z_a:+.2f}), {elapsed:.2f} s",
    )


GRID = ExperimentGrid(n_list=(5000,), mode=PAIRED, runs_per_cell=10, seed=1)
GRID_BASE = SimConfig(budget=20_000)


@pytest.fixture(scope="module")
def grid_rows():
    rows = run_grid_rows(GRID, GRID_BASE)
    return [r for r in rows if r["mode"] == ALOHA]


def _cell(r):
    return f"SF{r['sf']}/{r['payload_bytes']}B/{float(r['t_tx_s']):g}s"


def test_criterion_6a_success_gain_nonnegative(grid_rows):
    ok_rows = [r for r in grid_rows if r["status"] == "ok"]
    skipped = [_cell(r) + f" ({r['status']})" for r in grid_rows if r["status"] != "ok"]
    negative = [f"{_cell(r)}={float(r['success_gain_pct']):+.2f}%" for r in ok_rows if float(r["success_gain_pct"]) < 0]
    verdict(
        "6a success gain >= 0 in every cell",
        not negative and len(ok_rows) > 0,
        f"{len(ok_rows)} cells evaluated, negative: {negative or 'none'}; not simulated: {skipped or 'none'}",
    )


def test_criterion_6b_efficiency_gain_signs(grid_rows):
    by = {(int(r["sf"]), int(r["payload_bytes"]), float(r["t_tx_s"])): r for r in grid_rows}
    t_long, t_short = max(GRID.t_tx_list), min(GRID.t_tx_list)
    small = by[7, min(GRID.payloads[7]), t_long]
    large = by[7, max(GRID.payloads[7]), t_short]
    g_small = float(small["efficiency_gain_pct"])
    g_large = float(large["efficiency_gain_pct"])
    verdict(
        "6b efficiency gain signs",
        g_small < 0 < g_large,
        f"{_cell(small)}={g_small:+.2f}% (want <0), {_cell(large)}={g_large:+.2f}% (want >0)",
    )


def test_criterion_7_scale_trend():
    base = SimConfig(budget=20_000)
    gains = {}
    for n in (5000, 10000):
        rows = run_cell(base, Cell(7, 221, 60.0, n), PAIRED, 10, 1)
        gains[n] = float(rows[0]["success_gain_pct"])
    verdict("7 gain grows with density", gains[10000] >= gains[5000], f"SF7/221B/60s: N=5000 {gains[5000]:+.2f}%, N=10000 {gains[10000]:+.2f}%")


def test_criterion_8_deterministic_csv():
    grid = ExperimentGrid(sf_list=(7, 9), payloads={7: (51,), 9: (10,)}, t_tx_list=(60.0, 600.0), n_list=(1000,), runs_per_cell=2, seed=9)
    base = SimConfig(budget=5000)
    a = rows_to_csv(run_grid_rows(grid, base)).encode()
    b = rows_to_csv(run_grid_rows(grid, base)).encode()
    verdict("8 byte-identical CSV", a == b, f"{len(a)} bytes, identical={a == b}")


def test_criterion_9_offset_statistics():
    u, n = 0.68e-3, 1_000_000
    x = sample_timing_offset(np.random.default_rng(99), u, n)
    sd_err = abs(x.std(ddof=1) - u) / u
    z = x.mean() / (u / math.sqrt(n))
    verdict("9 timing offset statistics", sd_err <= 0.02 and abs(z) <= 3, f"std err {sd_err:.3%}, mean z={z:+.2f}")
