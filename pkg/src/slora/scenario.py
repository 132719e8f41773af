"""Random deployment of devices around a single gateway."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .config import ConfigError, SimConfig

TOPOLOGY_STREAM = 0


@dataclass(frozen=True)
class DevicePlacement:
    device_id: int
    distance_to_gw: float
    floor: int
    internal_walls: int
    angle: float = 0.0


@dataclass(frozen=True)
class Topology:
    gateway_position: tuple[float, float]
    inner_radius: float
    outer_radius: float
    distance: np.ndarray
    angle: np.ndarray
    floor: np.ndarray
    walls: np.ndarray

    def __len__(self) -> int:
        return len(self.distance)

    @property
    def devices(self) -> list[DevicePlacement]:
        return [
            DevicePlacement(i, float(d), int(f), int(w), float(a))
            for i, (d, f, w, a) in enumerate(zip(self.distance, self.floor, self.walls, self.angle))
        ]

    def positions(self) -> np.ndarray:
        gx, gy = self.gateway_position
        return np.column_stack([gx + self.distance * np.cos(self.angle), gy + self.distance * np.sin(self.angle)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["device_id", "distance_m", "floor", "walls"])
        for i in range(len(self)):
            w.writerow([i, repr(float(self.distance[i])), int(self.floor[i]), int(self.walls[i])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, inner_radius: float = 0.0, outer_radius: float | None = None) -> "Topology":
        rows = list(csv.DictReader(io.StringIO(text)))
        distance = np.array([float(r["distance_m"]) for r in rows])
        return cls(
            gateway_position=(0.0, 0.0),
            inner_radius=inner_radius,
            outer_radius=outer_radius if outer_radius is not None else float(distance.max(initial=0.0)),
            distance=distance,
            angle=np.zeros(len(rows)),
            floor=np.array([int(r["floor"]) for r in rows], dtype=np.int64),
            walls=np.array([int(r["walls"]) for r in rows], dtype=np.int64),
        )


def sample_radii(rng: np.random.Generator, n: int, inner: float, outer: float) -> np.ndarray:
    """Distances of *n* points drawn uniformly by area over the annulus [inner, outer]."""
    u = rng.random(n)
    return np.sqrt(inner**2 + u * (outer**2 - inner**2))


def radial_cdf(d, inner: float, outer: float):
    d = np.clip(d, inner, outer)
    return (d**2 - inner**2) / (outer**2 - inner**2)


def generate_topology(config: SimConfig, seed: int) -> Topology:
    if config.n_devices < 1:
        raise ConfigError(f"n_devices must be >= 1, got {config.n_devices}")
    if not 0 <= config.inner_radius < config.outer_radius:
        raise ConfigError(
            f"need 0 <= inner_radius < outer_radius, got {config.inner_radius}, {config.outer_radius}"
        )
    rng = np.random.default_rng([seed, TOPOLOGY_STREAM])
    n = config.n_devices
    distance = sample_radii(rng, n, config.inner_radius, config.outer_radius)
    # angle is not used by the channel model
    angle = rng.uniform(0.0, 2 * np.pi, n)
    lo, hi = config.floor_range
    floor = rng.integers(lo, hi + 1, n)
    lo, hi = config.walls_range
    walls = rng.integers(lo, hi + 1, n)
    return Topology((0.0, 0.0), config.inner_radius, config.outer_radius, distance, angle, floor, walls)


def device_height(floor, config: SimConfig):
    """Antenna height; floor 1 is the ground floor."""
    return config.ground_height + config.floor_height * (np.asarray(floor) - 1)
