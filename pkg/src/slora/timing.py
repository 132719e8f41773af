"""Clock model and timing-uncertainty budget for slotted transmissions.

All quantities are in seconds unless stated otherwise. The budget combines
three independent contributions: transceiver latency jitter, propagation
delay over the deployment annulus, and local-clock error accumulated between
the last synchronization event and the transmission deadline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SPEED_OF_LIGHT


@dataclass(frozen=True)
class SkmClock:
    """First-order affine clock: reading ``(alpha + beta * t) * T0``."""

    alpha: float
    beta: float
    period: float
    nominal_hz: float

    def __post_init__(self):
        if abs(self.drift) >= 1e-3:
            raise ValueError(f"clock drift {self.drift:.3g} out of range (|drift| < 1e-3)")

    @classmethod
    def with_drift(cls, nominal_hz: float, drift: float = 0.0, alpha: float = 0.0) -> "SkmClock":
        return cls(alpha=alpha, beta=nominal_hz * (1.0 + drift), period=1.0 / nominal_hz, nominal_hz=nominal_hz)

    @property
    def drift(self) -> float:
        return (self.beta - self.nominal_hz) * self.period

    def reading(self, t: float) -> float:
        return clock_reading(self, t)

    def offset(self, t: float) -> float:
        return self.reading(t) - t


def clock_reading(clock: SkmClock, t: float) -> float:
    if t < 0:
        raise ValueError("t must be >= 0")
    return (clock.alpha + clock.beta * t) * clock.period


def elapsed_since_sync(clock: SkmClock, t0: float, td: float) -> float:
    """Local time elapsed between a synchronization event at *t0* and deadline *td*."""
    if td < t0:
        raise ValueError("td must not precede t0")
    return clock.beta * (td - t0) * clock.period


def quantize_to_tick(t, period: float):
    """Timestamp latched on the next rising clock edge."""
    return np.ceil(np.asarray(t) / period) * period


@dataclass(frozen=True)
class PropagationStats:
    mu_pd: float
    sigma_pd: float
    u_pd: float


def propagation_stats(inner: float, outer: float, v: float = SPEED_OF_LIGHT) -> PropagationStats:
    """Moments of the one-way delay for devices uniform by area over an annulus."""
    if not 0 <= inner < outer:
        raise ValueError(f"need 0 <= inner < outer, got {inner}, {outer}")
    rl, rL = inner, outer
    mu = 2 * (rL**2 + rl**2 + rL * rl) / (3 * (rL + rl) * v)
    sigma = (rL - rl) * math.sqrt(rL**2 + rl**2 + 4 * rL * rl) / (3 * math.sqrt(2) * v * (rL + rl))
    # the mean delay is unknown to the device, so it counts toward the uncertainty
    return PropagationStats(mu, sigma, math.hypot(mu, sigma))


def ct_detection_uncertainty(mu_dct: float, sigma_dct: float) -> float:
    """Per-receiver CT-group detection uncertainty from the two-receiver difference stats.

    The difference of two identical receivers carries twice the single-receiver
    variance, hence the halving.
    """
    if mu_dct < 0 or sigma_dct < 0:
        raise ValueError("inputs must be >= 0")
    return math.sqrt((mu_dct**2 + sigma_dct**2) / 2)


def quantization_uncertainty(period: float) -> float:
    return period / math.sqrt(3)


def sync_instant_uncertainty(period: float, u_t0s: float) -> float:
    return math.hypot(quantization_uncertainty(period), u_t0s)


def sync_interval_uncertainty(period: float, u_t0s: float) -> float:
    # both ends of the interval are latched, each with quantization and detection error
    return math.sqrt(4 * quantization_uncertainty(period) ** 2 + 4 * u_t0s**2)


def rate_uncertainty(beta: float, t_sync: float, u_tsync: float) -> float:
    """Uncertainty of the estimated tick rate, ticks/s."""
    return beta / t_sync * u_tsync


def transmission_clock_uncertainty(
    k: int, period: float, u_t0s: float, gamma: float = 0.0, t_sync: float = 60.0
) -> float:
    """Worst-case local-clock uncertainty ``k`` sync intervals after synchronizing."""
    if k < 1 or period <= 0:
        raise ValueError("need k >= 1 and period > 0")
    beta = (1.0 + gamma) / period
    u_td = quantization_uncertainty(period)
    u_t0 = sync_instant_uncertainty(period, u_t0s)
    u_beta = rate_uncertainty(beta, t_sync, sync_interval_uncertainty(period, u_t0s))
    elapsed = k * t_sync
    return period * math.sqrt(elapsed**2 * u_beta**2 + beta**2 * u_td**2 + beta**2 * u_t0**2)


def transmission_clock_uncertainty_closed_form(k: int, period: float, u_t0s: float, gamma: float = 0.0) -> float:
    return (1 + gamma) * math.sqrt((4 * k**2 + 2) * period**2 / 3 + (4 * k**2 + 1) * u_t0s**2)


def transmission_clock_uncertainty_approx(k: int, u_t0s: float) -> float:
    """Large-k, coarse-detection limit of :func:`transmission_clock_uncertainty`."""
    return 2 * k * u_t0s


@dataclass(frozen=True)
class UncertaintyBudget:
    u_tx: float
    u_pd: float
    u_v: float
    u_combined: float
    u_td: float = 0.0
    u_t0: float = 0.0
    u_t0q: float = 0.0
    u_t0s: float = 0.0
    u_beta: float = 0.0
    u_tsync: float = 0.0

    def __post_init__(self):
        for name in ("u_tx", "u_pd", "u_v", "u_combined", "u_td", "u_t0", "u_t0q", "u_t0s", "u_beta", "u_tsync"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


def combined_uncertainty(u_tx: float, u_pd: float, u_v: float) -> UncertaintyBudget:
    if min(u_tx, u_pd, u_v) < 0:
        raise ValueError("uncertainties must be >= 0")
    return UncertaintyBudget(u_tx, u_pd, u_v, math.sqrt(u_tx**2 + u_pd**2 + u_v**2))


def budget_for(config) -> UncertaintyBudget:
    """Full budget for a slotted configuration, with every intermediate term filled in."""
    period = config.clock_period
    u_t0s = config.u_t0s
    if u_t0s is None:
        u_t0s = ct_detection_uncertainty(config.mu_delta_ct, config.sigma_delta_ct)
    gamma = config.gamma_max
    pd = propagation_stats(config.inner_radius, config.outer_radius, config.speed_of_light)
    u_v = transmission_clock_uncertainty(config.k, period, u_t0s, gamma, config.t_sync)
    u_tsync = sync_interval_uncertainty(period, u_t0s)
    total = combined_uncertainty(config.u_tx, pd.u_pd, u_v)
    return UncertaintyBudget(
        u_tx=total.u_tx,
        u_pd=total.u_pd,
        u_v=total.u_v,
        u_combined=total.u_combined,
        u_td=quantization_uncertainty(period),
        u_t0=sync_instant_uncertainty(period, u_t0s),
        u_t0q=quantization_uncertainty(period),
        u_t0s=u_t0s,
        u_beta=rate_uncertainty((1 + gamma) / period, config.t_sync, u_tsync),
        u_tsync=u_tsync,
    )


def sample_timing_offset(rng: np.random.Generator, u: float, size=None):
    """Zero-mean Gaussian transmission-instant error with standard deviation *u*."""
    if u < 0:
        raise ValueError("u must be >= 0")
    if u == 0:
        return 0.0 if size is None else np.zeros(size)
    return rng.normal(0.0, u, size)
