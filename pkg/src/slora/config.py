"""Scenario parameters and the flat TOML config format.

Every field of :class:`SimConfig` can be overridden from a config file; the
defaults are the urban-deployment values the simulator was calibrated with.
Grid-only keys (``sf_list``, ``payloads_sf7``, ...) are read by
:func:`load_grid`.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib

SPEED_OF_LIGHT = 299_792_458.0

ALOHA = "aloha"
SLOTTED = "slotted"
PAIRED = "paired"
MAC_MODES = (ALOHA, SLOTTED)

# Maximum application payload per SF at 125 kHz (EU868 regional limits).
MAX_PAYLOAD = {7: 221, 8: 221, 9: 115, 10: 51, 11: 51, 12: 51}

SNR_THRESHOLDS = {7: -6.0, 8: -9.0, 9: -12.0, 10: -15.0, 11: -17.5, 12: -20.0}


class ConfigError(ValueError):
    """Raised for an inconsistent or unusable parameter set."""


@dataclass(frozen=True)
class SimConfig:
    # deployment
    n_devices: int = 5000
    outer_radius: float = 1500.0
    inner_radius: float = 0.0
    gw_height: float = 15.0
    floor_range: tuple[int, int] = (1, 4)
    walls_range: tuple[int, int] = (0, 3)
    floor_height: float = 3.0
    ground_height: float = 1.0

    # frame
    sf: int = 7
    payload_bytes: int = 10
    bandwidth: float = 125e3
    coding_rate: int = 8  # denominator of 4/x
    preamble_symbols: int = 8
    explicit_header: bool = True
    crc: bool = True
    low_data_rate_opt: bool | None = None  # None: on when T_sym > 16 ms

    # link budget
    tx_power: float = 14.0
    noise_figure: float = 6.0
    noise_psd: float = -174.0
    shadowing_sigma: float = 7.8
    static_shadowing: bool = False
    reference_loss: float = 127.41
    reference_distance: float = 40.0
    path_loss_exponent: float = 2.08
    wall_loss: float = 5.0
    floor_gain: float = 2.0
    speed_of_light: float = SPEED_OF_LIGHT

    # reception
    snr_thresholds: Mapping[int, float] = field(default_factory=lambda: dict(SNR_THRESHOLDS))
    sir_threshold: float = 1.0
    preamble_survival_symbols: int = 5

    # MAC
    mac_mode: str = SLOTTED
    t_tx: float = 600.0
    t_sync: float = 60.0
    guard_time_unit: float = 3e-3
    delta: float = 0.0
    duty_cycle: float = 0.01

    # synchronization / timing uncertainty
    u_tx: float = 1.4e-6
    mu_delta_ct: float = 0.41e-3
    sigma_delta_ct: float = 0.24e-3
    u_t0s: float | None = None  # None: derived from the CT-group difference stats
    clock_hz: float = 32768.0
    drift_ppm: float = 20.0
    ideal_timing: bool = False

    # energy
    vdd: float = 3.3
    i_tx_lora: float = 44e-3
    i_sleep_lora: float = 100e-9
    i_rx_fm: float = 1.2e-3
    i_idle_fm: float = 120e-9
    t_on: float = 1e-3
    t_ct: float = 86.7e-3
    u_ct: float = 62e-3
    count_phy_bits: bool = False

    # run control
    budget: int = 200_000
    ideal_channel: bool = False

    def __post_init__(self):
        object.__setattr__(self, "snr_thresholds", {int(k): float(v) for k, v in self.snr_thresholds.items()})
        object.__setattr__(self, "floor_range", tuple(self.floor_range))
        object.__setattr__(self, "walls_range", tuple(self.walls_range))

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def validate(self) -> "SimConfig":
        if self.n_devices < 1:
            raise ConfigError(f"n_devices must be >= 1, got {self.n_devices}")
        if not 0 <= self.inner_radius < self.outer_radius:
            raise ConfigError(
                f"need 0 <= inner_radius < outer_radius, got {self.inner_radius}, {self.outer_radius}"
            )
        if self.sf not in MAX_PAYLOAD:
            raise ConfigError(f"unsupported spreading factor {self.sf}")
        if not 1 <= self.payload_bytes <= MAX_PAYLOAD[self.sf]:
            raise ConfigError(f"payload {self.payload_bytes} B exceeds SF{self.sf} maximum {MAX_PAYLOAD[self.sf]} B")
        if self.coding_rate not in (5, 6, 7, 8):
            raise ConfigError(f"coding_rate is the 4/x denominator in 5..8, got {self.coding_rate}")
        if self.mac_mode not in MAC_MODES:
            raise ConfigError(f"mac_mode must be one of {MAC_MODES}, got {self.mac_mode!r}")
        if self.t_tx <= 0 or self.t_sync <= 0:
            raise ConfigError("t_tx and t_sync must be positive")
        if self.mac_mode == SLOTTED and not _is_multiple(self.t_tx, self.t_sync):
            raise ConfigError(f"t_tx={self.t_tx} s is not a multiple of t_sync={self.t_sync} s")
        if self.budget < 0:
            raise ConfigError("budget must be >= 0")
        if self.drift_ppm < 0 or self.drift_ppm >= 1000:
            raise ConfigError("drift_ppm must lie in [0, 1000)")
        if self.sf not in self.snr_thresholds:
            raise ConfigError(f"no SNR threshold configured for SF{self.sf}")
        return self

    @property
    def k(self) -> int:
        return int(round(self.t_tx / self.t_sync))

    @property
    def clock_period(self) -> float:
        return 1.0 / self.clock_hz

    @property
    def gamma_max(self) -> float:
        return self.drift_ppm * 1e-6

    def as_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["snr_thresholds"] = {str(k): v for k, v in sorted(self.snr_thresholds.items())}
        d["floor_range"] = list(self.floor_range)
        d["walls_range"] = list(self.walls_range)
        return d

    def digest(self, *, exclude: tuple[str, ...] = ()) -> str:
        d = {k: v for k, v in self.as_dict().items() if k not in exclude}
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def _is_multiple(value: float, unit: float) -> bool:
    ratio = value / unit
    return round(ratio) >= 1 and abs(ratio - round(ratio)) < 1e-9


_FIELDS = {f.name: f for f in dataclasses.fields(SimConfig)}


def config_from_mapping(values: Mapping[str, Any], base: SimConfig | None = None) -> SimConfig:
    """Apply the ``SimConfig`` keys in *values* on top of *base*; unknown keys are ignored."""
    base = base or SimConfig()
    changes = {}
    for key, value in values.items():
        if key not in _FIELDS:
            continue
        if key == "snr_thresholds":
            value = {int(k): float(v) for k, v in dict(value).items()}
        changes[key] = value
    try:
        return dataclasses.replace(base, **changes)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def read_config_file(path: str | Path) -> dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def load_config(path: str | Path) -> SimConfig:
    return config_from_mapping(read_config_file(path)).validate()
