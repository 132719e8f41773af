"""Discrete-event core.

True time advances through a heap of events. At every interval boundary
each device schedules one frame (ALOHA: anywhere in the interval; slotted:
in a random slot of the contention window). Frames that overlap at the
gateway form chains; a chain is resolved once the channel goes idle, which
gives exact pairwise-overlap semantics without global scans.
"""

from __future__ import annotations

import dataclasses
import enum
import heapq
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

import numpy as np

from . import channel, timing
from .config import ALOHA, SLOTTED, ConfigError, SimConfig
from .energy import EnergyLedger, PowerProfile, energy_efficiency, interval_state_times
from .mac import SlotSchedule, build_schedule, schedule_aloha_tx, schedule_slotted_tx
from .phy import FrameParams, Outcome, TransmissionRecord, resolve_receptions, time_on_air
from .scenario import Topology, generate_topology

logger = logging.getLogger(__name__)

SHADOW_STREAM = 1
MAC_STREAM = 2
DRIFT_STREAM = 3
OFFSET_STREAM = 4

LORAWAN_OVERHEAD_BYTES = 13


class EventKind(enum.IntEnum):
    # at equal times a frame ending frees the channel before the next one starts
    TX_END = 0
    WINDOW_BOUNDARY = 1
    TX_START = 2


class SimEvent(NamedTuple):
    time: float
    kind: EventKind
    device_id: int
    ref: int = 0


@dataclass
class RunReport:
    mode: str
    seed: int
    config: dict[str, Any]
    generated: int
    delivered: int
    outcomes: dict[str, int]
    ledger: EnergyLedger
    intervals: int
    duration: float
    toa: float
    schedule: SlotSchedule | None = None
    uncertainty: timing.UncertaintyBudget | None = None
    n_clamped: int = 0
    delivered_per_device: np.ndarray | None = field(default=None, repr=False)

    @property
    def success_probability(self) -> float:
        if self.generated == 0:
            raise ValueError("success probability undefined with no generated messages")
        return self.delivered / self.generated

    @property
    def energy_efficiency(self) -> float:
        return energy_efficiency(self.ledger)

    @property
    def total_energy(self) -> float:
        return self.ledger.total_energy


def intervals_for(budget: int, n_devices: int) -> int:
    return math.ceil(budget / n_devices) if budget > 0 else 0


def slot_schedule(config: SimConfig, toa: float | None = None) -> SlotSchedule:
    if toa is None:
        toa = time_on_air(FrameParams.from_config(config))
    return build_schedule(config.t_tx, toa, config.guard_time_unit, config.delta, config.t_sync)


def run(config: SimConfig, seed: int, topology: Topology | None = None) -> RunReport:
    config.validate()
    mode = config.mac_mode
    frame = FrameParams.from_config(config)
    toa = time_on_air(frame)
    n = config.n_devices
    intervals = intervals_for(config.budget, n)

    schedule = budget = None
    u = 0.0
    if mode == SLOTTED:
        schedule = slot_schedule(config, toa)
        budget = timing.budget_for(config)
        u = 0.0 if config.ideal_timing else budget.u_combined

    if topology is None:
        topology = generate_topology(config, seed)
    elif len(topology) != n:
        raise ConfigError(f"topology has {len(topology)} devices, config expects {n}")

    params = channel.LinkBudgetParams.from_config(config)
    snr_thresholds = dict(config.snr_thresholds)
    sir = config.sir_threshold
    survival = config.preamble_survival_symbols
    if config.ideal_channel:
        params = dataclasses.replace(params, shadowing_sigma=0.0)
        snr_thresholds = {k: -math.inf for k in snr_thresholds}
        sir = math.inf
        survival = 0

    loss = channel.path_loss(topology.distance, topology.floor, topology.walls, params)
    mean_snr = channel.rx_snr(None, config.tx_power, loss, params, shadow=0.0)
    prop_delay = topology.distance / config.speed_of_light

    rng_shadow = np.random.default_rng([seed, SHADOW_STREAM])
    rng_mac = np.random.default_rng([seed, MAC_STREAM])
    rng_drift = np.random.default_rng([seed, DRIFT_STREAM])
    rng_offset = np.random.default_rng([seed, OFFSET_STREAM])
    gamma = rng_drift.uniform(-config.gamma_max, config.gamma_max, n)
    static_shadow = None
    if config.static_shadowing and params.shadowing_sigma > 0:
        static_shadow = rng_shadow.normal(0.0, params.shadowing_sigma, n)

    profile = PowerProfile.from_config(config)
    ledger = EnergyLedger(n)
    interval_times = interval_state_times(mode, config.t_tx, toa, profile, gamma)

    outcomes: Counter[Outcome] = Counter()
    delivered_per_device = np.zeros(n, dtype=np.int64)
    frames: dict[int, TransmissionRecord] = {}
    chain: list[TransmissionRecord] = []
    on_air = 0
    next_ref = 0
    last_time = -math.inf

    heap: list[SimEvent] = []
    if intervals:
        heapq.heappush(heap, SimEvent(0.0, EventKind.WINDOW_BOUNDARY, -1, 0))

    def close_chain():
        for rec, result in zip(chain, resolve_receptions(chain, sir, snr_thresholds, survival, config.bandwidth)):
            rec.outcome = result
            outcomes[result] += 1
            if result is Outcome.DELIVERED:
                delivered_per_device[rec.device_id] += 1
        chain.clear()

    while heap:
        ev = heapq.heappop(heap)
        if ev.time < last_time:
            raise RuntimeError("event queue went back in time")
        last_time = ev.time

        if ev.kind is EventKind.WINDOW_BOUNDARY:
            j = ev.ref
            start = j * config.t_tx
            if mode == SLOTTED:
                instant, slot = schedule_slotted_tx(rng_mac, start, schedule, u, n, offset_rng=rng_offset)
            else:
                instant = schedule_aloha_tx(rng_mac, start, config.t_tx, n)
                slot = np.full(n, -1)
            if static_shadow is not None:
                shadow = static_shadow
            elif params.shadowing_sigma > 0:
                shadow = rng_shadow.normal(0.0, params.shadowing_sigma, n)
            else:
                shadow = np.zeros(n)
            snr = mean_snr - shadow
            arrival = instant + prop_delay
            for i in range(n):
                frames[next_ref] = TransmissionRecord(
                    i, config.sf, float(arrival[i]), toa, float(snr[i]), int(slot[i]), j
                )
                heapq.heappush(heap, SimEvent(float(arrival[i]), EventKind.TX_START, i, next_ref))
                next_ref += 1
            ledger.add_interval(interval_times, profile)
            if j + 1 < intervals:
                heapq.heappush(heap, SimEvent((j + 1) * config.t_tx, EventKind.WINDOW_BOUNDARY, -1, j + 1))

        elif ev.kind is EventKind.TX_START:
            rec = frames[ev.ref]
            chain.append(rec)
            on_air += 1
            heapq.heappush(heap, SimEvent(rec.start_time + rec.toa, EventKind.TX_END, ev.device_id, ev.ref))

        else:
            del frames[ev.ref]
            on_air -= 1
            if on_air == 0:
                close_chain()

    generated = n * intervals
    delivered = int(delivered_per_device.sum())
    bytes_per_msg = config.payload_bytes + (LORAWAN_OVERHEAD_BYTES if config.count_phy_bits else 0)
    ledger.bits_delivered = 8 * bytes_per_msg * delivered

    return RunReport(
        mode=mode,
        seed=seed,
        config=config.as_dict(),
        generated=generated,
        delivered=delivered,
        outcomes={o.name: outcomes.get(o, 0) for o in Outcome},
        ledger=ledger,
        intervals=intervals,
        duration=intervals * config.t_tx,
        toa=toa,
        schedule=schedule,
        uncertainty=budget,
        n_clamped=channel.clamped_count(topology.distance, params),
        delivered_per_device=delivered_per_device,
    )


def run_paired(config: SimConfig, seed: int) -> tuple[RunReport, RunReport]:
    """ALOHA and slotted runs sharing topology, shadowing and drift streams."""
    topology = generate_topology(config, seed)
    aloha = run(config.replace(mac_mode=ALOHA), seed, topology)
    slotted = run(config.replace(mac_mode=SLOTTED), seed, topology)
    return aloha, slotted


@dataclass(frozen=True)
class AggregateReport:
    config: dict[str, Any]
    n_runs: int
    success_mean: float
    success_std: float
    efficiency_mean: float
    efficiency_std: float
    seeds: tuple[int, ...]


def _mean_std(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), std


def aggregate(reports: Sequence[RunReport]) -> AggregateReport:
    if not reports:
        raise ValueError("nothing to aggregate")
    first = reports[0].config
    for r in reports[1:]:
        if r.config != first:
            raise ValueError("cannot aggregate runs with different configurations")
    s_mean, s_std = _mean_std([r.success_probability for r in reports])
    e_mean, e_std = _mean_std([r.energy_efficiency for r in reports])
    return AggregateReport(first, len(reports), s_mean, s_std, e_mean, e_std, tuple(r.seed for r in reports))
