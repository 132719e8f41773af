"""Transmission scheduling for pure-ALOHA LoRaWAN and slotted S-LoRa."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ALOHA, SLOTTED, ConfigError
from .timing import sample_timing_offset


@dataclass(frozen=True)
class SlotSchedule:
    t_tx: float
    k: int
    t_sync: float
    delta: float
    toa: float
    t_g: float
    t_slot: float
    m_slots: int

    @property
    def contention_window(self) -> float:
        return self.t_tx - self.delta


def guard_time(k: int, t_g0: float) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    return k * t_g0


def build_schedule(t_tx: float, toa: float, t_g0: float, delta: float = 0.0, t_sync: float = 60.0) -> SlotSchedule:
    ratio = t_tx / t_sync
    k = int(round(ratio))
    if k < 1 or abs(ratio - k) > 1e-9:
        raise ConfigError(f"t_tx={t_tx} s is not a positive multiple of {t_sync} s")
    t_g = guard_time(k, t_g0)
    t_slot = toa + t_g
    if t_slot <= 0:
        raise ConfigError("slot duration must be positive")
    t_cw = t_tx - delta
    if t_cw < t_slot:
        raise ConfigError(f"contention window {t_cw:.6g} s shorter than one slot ({t_slot:.6g} s)")
    # small epsilon keeps exact multiples from rounding down
    m = int(math.floor(t_cw / t_slot * (1 + 1e-12)))
    return SlotSchedule(t_tx, k, t_sync, delta, toa, t_g, t_slot, m)


def schedule_slotted_tx(
    rng: np.random.Generator,
    window_start: float,
    schedule: SlotSchedule,
    u: float,
    size=None,
    *,
    offset_rng: np.random.Generator | None = None,
    clip: bool = True,
):
    """Transmission instant(s) and slot index(es) for one contention window.

    The frame sits mid-guard (``t_g/2`` after the slot boundary) so timing
    errors of either sign are tolerated equally. With *clip* the instant is
    kept inside ``[window_start, window_start + t_tx)``. The slot comes from
    one uniform draw of *rng* per frame, the same draw an ALOHA device
    would use for its instant, so paired runs see coupled traffic.
    """
    slot = np.floor(rng.random(size) * schedule.m_slots).astype(np.int64)
    slot = np.minimum(slot, schedule.m_slots - 1)
    ideal = window_start + schedule.delta + slot * schedule.t_slot + schedule.t_g / 2
    instant = ideal + sample_timing_offset(offset_rng or rng, u, size)
    if clip:
        instant = np.clip(instant, window_start, np.nextafter(window_start + schedule.t_tx, -np.inf))
    if size is None:
        return float(instant), int(slot)
    return instant, slot


def schedule_aloha_tx(rng: np.random.Generator, period_start: float, t_tx: float, size=None):
    if t_tx <= 0:
        raise ValueError("t_tx must be positive")
    return period_start + rng.random(size) * t_tx


def sync_windows_per_interval(mode: str) -> int:
    """FM-RDS listening windows needed per transmission interval."""
    if mode == SLOTTED:
        return 2
    if mode == ALOHA:
        return 0
    raise ValueError(f"unknown MAC mode {mode!r}")
