"""Uplink link budget: log-distance path loss, indoor penetration, shadowing."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinkBudgetParams:
    tx_power: float = 14.0
    noise_figure: float = 6.0
    noise_psd: float = -174.0
    bandwidth: float = 125e3
    shadowing_sigma: float = 7.8
    gw_height: float = 15.0
    wall_loss: float = 5.0
    floor_gain: float = 2.0
    floor_height: float = 3.0
    path_loss_exponent: float = 2.08
    reference_loss: float = 127.41
    reference_distance: float = 40.0

    @classmethod
    def from_config(cls, config) -> "LinkBudgetParams":
        return cls(
            tx_power=config.tx_power,
            noise_figure=config.noise_figure,
            noise_psd=config.noise_psd,
            bandwidth=config.bandwidth,
            shadowing_sigma=config.shadowing_sigma,
            gw_height=config.gw_height,
            wall_loss=config.wall_loss,
            floor_gain=config.floor_gain,
            floor_height=config.floor_height,
            path_loss_exponent=config.path_loss_exponent,
            reference_loss=config.reference_loss,
            reference_distance=config.reference_distance,
        )


def noise_floor(params: LinkBudgetParams) -> float:
    if params.bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    return params.noise_psd + 10 * math.log10(params.bandwidth) + params.noise_figure


def clamped_count(distance, params: LinkBudgetParams) -> int:
    """Number of distances that fall inside the reference distance."""
    return int(np.count_nonzero(np.asarray(distance) < params.reference_distance))


def path_loss(distance, floors, walls, params: LinkBudgetParams):
    """Deterministic loss in dB; floor 1 is ground level, each floor above gains ``floor_gain``."""
    d = np.asarray(distance, dtype=float)
    n_clamped = clamped_count(d, params)
    if n_clamped:
        logger.debug("%d distance(s) below %.1f m clamped", n_clamped, params.reference_distance)
    d = np.maximum(d, params.reference_distance)
    loss = (
        params.reference_loss
        + 10 * params.path_loss_exponent * np.log10(d / params.reference_distance)
        + np.asarray(walls) * params.wall_loss
        - (np.asarray(floors) - 1) * params.floor_gain
    )
    return loss if loss.ndim else float(loss)


def rx_snr(rng: np.random.Generator | None, tx_power: float, loss, params: LinkBudgetParams, shadow=None):
    """SNR in dB. Shadowing is drawn from *rng* unless *shadow* (dB) is given."""
    loss = np.asarray(loss, dtype=float)
    if shadow is None:
        if params.shadowing_sigma > 0 and rng is not None:
            shadow = rng.normal(0.0, params.shadowing_sigma, loss.shape)
        else:
            shadow = 0.0
    snr = tx_power - loss - shadow - noise_floor(params)
    return snr if np.ndim(snr) else float(snr)
