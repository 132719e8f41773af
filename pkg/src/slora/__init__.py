"""Slotted LoRaWAN (S-LoRa) versus pure-ALOHA LoRaWAN discrete-event simulator."""

from .config import ALOHA, PAIRED, SLOTTED, ConfigError, SimConfig, load_config
from .engine import AggregateReport, RunReport, aggregate, run, run_paired

__version__ = "0.1.0"

__all__ = [
    "ALOHA",
    "PAIRED",
    "SLOTTED",
    "AggregateReport",
    "ConfigError",
    "RunReport",
    "SimConfig",
    "aggregate",
    "load_config",
    "run",
    "run_paired",
]
