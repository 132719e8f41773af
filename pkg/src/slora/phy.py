"""LoRa airtime and gateway-side reception under the dominant-interferer capture model."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .config import MAX_PAYLOAD

SMALL_WINDOW = 16
_PAIR_CHUNK = 1 << 21


class Outcome(enum.IntEnum):
    DELIVERED = 0
    INTRA_SLOT_COLLISION = 1
    INTER_SLOT_COLLISION = 2
    BELOW_SNR = 3
    CAPTURE_LOSS = 4


@dataclass(frozen=True)
class FrameParams:
    sf: int
    bandwidth: float = 125e3
    coding_rate: int = 8
    preamble_symbols: int = 8
    payload_bytes: int = 10
    explicit_header: bool = True
    crc: bool = True
    low_data_rate_opt: bool | None = None

    def __post_init__(self):
        if not 6 <= self.sf <= 12:
            raise ValueError(f"spreading factor {self.sf} outside 6..12")
        if self.coding_rate not in (5, 6, 7, 8):
            raise ValueError(f"coding rate 4/{self.coding_rate} not supported")
        limit = MAX_PAYLOAD.get(self.sf, 255)
        if not 0 <= self.payload_bytes <= limit:
            raise ValueError(f"payload {self.payload_bytes} B exceeds SF{self.sf} maximum {limit} B")

    @classmethod
    def from_config(cls, config) -> "FrameParams":
        return cls(
            sf=config.sf,
            bandwidth=config.bandwidth,
            coding_rate=config.coding_rate,
            preamble_symbols=config.preamble_symbols,
            payload_bytes=config.payload_bytes,
            explicit_header=config.explicit_header,
            crc=config.crc,
            low_data_rate_opt=config.low_data_rate_opt,
        )

    @property
    def symbol_time(self) -> float:
        return 2**self.sf / self.bandwidth

    @property
    def ldro(self) -> bool:
        if self.low_data_rate_opt is None:
            return self.symbol_time > 16e-3
        return self.low_data_rate_opt


def payload_symbols(frame: FrameParams) -> int:
    de = int(frame.ldro)
    ih = int(not frame.explicit_header)
    denom = 4 * (frame.sf - 2 * de)
    if denom <= 0:
        raise ValueError(f"SF{frame.sf} with low-data-rate optimization leaves no payload bits per symbol")
    num = 8 * frame.payload_bytes - 4 * frame.sf + 28 + 16 * int(frame.crc) - 20 * ih
    return 8 + max(math.ceil(num / denom) * frame.coding_rate, 0)


def time_on_air(frame: FrameParams) -> float:
    n_symbols = frame.preamble_symbols + 4.25 + payload_symbols(frame)
    # one rounding step: symbol count times 2**SF is exact in binary
    return n_symbols * 2**frame.sf / frame.bandwidth


@dataclass(slots=True)
class TransmissionRecord:
    device_id: int
    sf: int
    start_time: float
    toa: float
    rx_power_snr: float
    slot: int = -1
    interval: int = 0
    outcome: Outcome | None = None

    @property
    def end_time(self) -> float:
        return self.start_time + self.toa


def _label(snr, thr, dom_power, dom_slot, slot, sir_threshold) -> Outcome:
    if snr < thr:
        return Outcome.BELOW_SNR
    if dom_power == -math.inf or snr - dom_power >= sir_threshold:
        return Outcome.DELIVERED
    if dom_power - snr >= sir_threshold:
        return Outcome.CAPTURE_LOSS
    if slot >= 0 and slot == dom_slot:
        return Outcome.INTRA_SLOT_COLLISION
    return Outcome.INTER_SLOT_COLLISION


def resolve_receptions(
    window: Sequence[TransmissionRecord],
    sir_threshold: float,
    snr_thresholds: Mapping[int, float],
    preamble_survival_symbols: int = 5,
    bandwidth: float = 125e3,
) -> list[Outcome]:
    """Outcome of every frame in a time-sorted window.

    Frame j interferes with frame i when both share an SF and j is still on
    air after the first ``preamble_survival_symbols`` symbols of i. Only the
    strongest interferer counts; i survives when it beats that interferer by
    at least ``sir_threshold`` dB and clears its SF's SNR threshold.
    """
    n = len(window)
    if n == 0:
        return []
    if n <= SMALL_WINDOW:
        dom_power, dom_idx = _dominant_small(window, preamble_survival_symbols, bandwidth)
    else:
        dom_power, dom_idx = _dominant_vectorized(window, preamble_survival_symbols, bandwidth)
    out = []
    for i, rec in enumerate(window):
        j = dom_idx[i]
        out.append(
            _label(
                rec.rx_power_snr,
                snr_thresholds[rec.sf],
                dom_power[i],
                window[j].slot if j >= 0 else -2,
                rec.slot,
                sir_threshold,
            )
        )
    return out


def _dominant_small(window, survival, bandwidth):
    n = len(window)
    dom_power = [-math.inf] * n
    dom_idx = [-1] * n
    for i, a in enumerate(window):
        vulnerable_from = a.start_time + survival * 2**a.sf / bandwidth
        a_end = a.start_time + a.toa
        for j, b in enumerate(window):
            if j == i or b.sf != a.sf:
                continue
            if b.start_time < a_end and b.start_time + b.toa > vulnerable_from:
                if b.rx_power_snr > dom_power[i]:
                    dom_power[i] = b.rx_power_snr
                    dom_idx[i] = j
    return dom_power, dom_idx


def _dominant_vectorized(window, survival, bandwidth):
    n = len(window)
    start = np.fromiter((r.start_time for r in window), float, n)
    toa = np.fromiter((r.toa for r in window), float, n)
    power = np.fromiter((r.rx_power_snr for r in window), float, n)
    sf = np.fromiter((r.sf for r in window), np.int64, n)
    dom_power = np.full(n, -np.inf)
    dom_idx = np.full(n, -1, dtype=np.int64)
    for value in np.unique(sf):
        (members,) = np.nonzero(sf == value)
        order = members[np.argsort(start[members], kind="stable")]
        p, idx = dominant_interferers(start[order], toa[order], power[order], survival * 2.0**value / bandwidth)
        dom_power[order] = p
        dom_idx[order] = np.where(idx >= 0, order[np.maximum(idx, 0)], -1)
    return dom_power, dom_idx


def dominant_interferers(start, toa, power, survive):
    """Strongest co-channel interferer of each frame; arrays sorted by *start*.

    Returns (power, index) with -inf / -1 where a frame has no interferer.
    """
    n = len(start)
    end = start + toa
    vulnerable_from = start + survive
    hi = np.searchsorted(start, end, side="left")
    lo = np.searchsorted(start, vulnerable_from - toa.max(), side="right")
    lo = np.minimum(lo, hi)
    counts = hi - lo
    best_p = np.full(n, -np.inf)
    best_j = np.full(n, -1, dtype=np.int64)
    a = 0
    cum = np.cumsum(counts)
    while a < n:
        base = cum[a - 1] if a else 0
        b = int(np.searchsorted(cum, base + _PAIR_CHUNK, side="right"))
        b = max(b, a + 1)
        c = counts[a:b]
        ii = np.repeat(np.arange(a, b), c)
        first = np.repeat(np.cumsum(c) - c, c)
        jj = np.arange(len(ii)) - first + np.repeat(lo[a:b], c)
        ok = (jj != ii) & (end[jj] > vulnerable_from[ii])
        ii, jj = ii[ok], jj[ok]
        if len(ii):
            # strongest per frame: sort by frame, then descending power, keep first
            order = np.lexsort((-power[jj], ii))
            ii, jj = ii[order], jj[order]
            keep = np.ones(len(ii), dtype=bool)
            keep[1:] = ii[1:] != ii[:-1]
            best_p[ii[keep]] = power[jj[keep]]
            best_j[ii[keep]] = jj[keep]
        a = b
    return best_p, best_j
