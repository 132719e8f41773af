"""Per-device energy accounting for the LoRa radio and the FM-RDS receiver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SLOTTED, ConfigError

STATES = ("lora_tx", "lora_sleep", "fm_rx", "fm_idle")


@dataclass(frozen=True)
class PowerProfile:
    p_tx_lora: float = 44e-3 * 3.3
    p_sleep_lora: float = 100e-9 * 3.3
    p_rx_fm: float = 1.2e-3 * 3.3
    p_idle_fm: float = 120e-9 * 3.3
    vdd: float = 3.3
    t_on: float = 1e-3
    t_ct: float = 86.7e-3
    u_ct: float = 62e-3
    gamma_max: float = 20e-6

    @classmethod
    def from_config(cls, config) -> "PowerProfile":
        v = config.vdd
        return cls(
            p_tx_lora=config.i_tx_lora * v,
            p_sleep_lora=config.i_sleep_lora * v,
            p_rx_fm=config.i_rx_fm * v,
            p_idle_fm=config.i_idle_fm * v,
            vdd=v,
            t_on=config.t_on,
            t_ct=config.t_ct,
            u_ct=config.u_ct,
            gamma_max=config.gamma_max,
        )

    def power(self, state: str) -> float:
        return {
            "lora_tx": self.p_tx_lora,
            "lora_sleep": self.p_sleep_lora,
            "fm_rx": self.p_rx_fm,
            "fm_idle": self.p_idle_fm,
        }[state]


def fm_listen_durations(t_tx: float, gamma, profile: PowerProfile):
    """Receiver on-time for the first and second CT-group of a resync.

    The first window also covers the drift accumulated since the previous
    resync; the second follows a freshly corrected clock.
    """
    if t_tx <= 0:
        raise ValueError("t_tx must be positive")
    gamma = np.abs(gamma)
    t_rx1 = profile.t_on + profile.t_ct + t_tx * gamma + 3 / math.sqrt(2) * profile.u_ct
    t_rx2 = profile.t_on + profile.t_ct + 3 * profile.u_ct
    return t_rx1, t_rx2


def interval_state_times(mode: str, t_tx: float, toa: float, profile: PowerProfile, gamma=0.0) -> dict[str, np.ndarray]:
    """Time spent in each radio state during one transmission interval."""
    gamma = np.asarray(gamma, dtype=float)
    times = {
        "lora_tx": np.full(gamma.shape, toa),
        "lora_sleep": np.full(gamma.shape, t_tx - toa),
        "fm_rx": np.zeros(gamma.shape),
        "fm_idle": np.zeros(gamma.shape),
    }
    if mode == SLOTTED:
        t_rx1, t_rx2 = fm_listen_durations(t_tx, gamma, profile)
        listen = t_rx1 + t_rx2
        if np.any(listen > t_tx):
            raise ConfigError(f"FM-RDS listen windows ({np.max(listen):.3f} s) exceed t_tx={t_tx} s")
        times["fm_rx"] = np.broadcast_to(listen, gamma.shape).astype(float)
        times["fm_idle"] = t_tx - times["fm_rx"]
    return times


def per_interval_energy(mode: str, t_tx: float, toa: float, profile: PowerProfile, gamma=0.0):
    """Joules spent by one device over one interval; the oscillator is not counted."""
    times = interval_state_times(mode, t_tx, toa, profile, gamma)
    energy = sum(profile.power(s) * times[s] for s in STATES)
    return float(energy) if np.ndim(energy) == 0 else energy


@dataclass
class EnergyLedger:
    """State times and energies per device, plus delivered bits."""

    n_devices: int
    time: dict[str, np.ndarray] = field(default_factory=dict)
    energy: dict[str, np.ndarray] = field(default_factory=dict)
    bits_delivered: int = 0

    def __post_init__(self):
        for s in STATES:
            self.time.setdefault(s, np.zeros(self.n_devices))
            self.energy.setdefault(s, np.zeros(self.n_devices))

    def add_interval(self, times: dict[str, np.ndarray], profile: PowerProfile) -> None:
        for s in STATES:
            self.time[s] += times[s]
            self.energy[s] += profile.power(s) * times[s]

    @property
    def total_energy(self) -> float:
        return float(sum(e.sum() for e in self.energy.values()))

    def device_energy(self) -> np.ndarray:
        return sum(self.energy[s] for s in STATES)

    def state_totals(self) -> dict[str, float]:
        return {s: float(self.energy[s].sum()) for s in STATES}


def energy_efficiency(ledger: EnergyLedger) -> float:
    """Delivered bits per joule over every device in the ledger."""
    total = ledger.total_energy
    if total <= 0:
        raise ValueError("energy efficiency undefined for zero energy")
    return ledger.bits_delivered / total
