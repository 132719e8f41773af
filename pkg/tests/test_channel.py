import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slora.channel import LinkBudgetParams, clamped_count, noise_floor, path_loss, rx_snr
from slora.config import SimConfig

P = LinkBudgetParams()


def test_noise_floor():
    assert noise_floor(P) == pytest.approx(-117.03, abs=0.005)
    assert noise_floor(LinkBudgetParams(bandwidth=1.0, noise_figure=0.0)) == -174.0
    assert noise_floor(LinkBudgetParams(noise_figure=0.0)) == pytest.approx(-123.03, abs=0.005)
    with pytest.raises(ValueError):
        noise_floor(LinkBudgetParams(bandwidth=0.0))


def test_reference_point():
    assert path_loss(P.reference_distance, 1, 0, P) == pytest.approx(P.reference_loss)


def test_decade():
    assert path_loss(10 * P.reference_distance, 1, 0, P) - P.reference_loss == pytest.approx(20.8)


def test_walls_and_floors_additive():
    d = 700.0
    assert path_loss(d, 1, 2, P) - path_loss(d, 1, 0, P) == pytest.approx(10.0)
    assert path_loss(d, 3, 0, P) - path_loss(d, 1, 0, P) == pytest.approx(-4.0)


def test_clamp():
    assert path_loss(1.0, 1, 0, P) == pytest.approx(P.reference_loss)
    assert clamped_count([1.0, 39.9, 40.0, 500.0], P) == 2


def test_vectorized():
    d = np.array([40.0, 400.0, 4000.0])
    loss = path_loss(d, np.ones(3), np.zeros(3), P)
    assert np.allclose(np.diff(loss), 20.8)


@given(
    st.floats(1.0, 1e5), st.floats(0.0, 1e5), st.integers(1, 4), st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)
)
def test_monotone(d, extra, floor, walls, more_walls, floors_down):
    base = path_loss(d, floor, walls, P)
    assert path_loss(d + extra, floor, walls, P) >= base - 1e-9
    assert path_loss(d, floor, walls + more_walls, P) >= base
    assert path_loss(d, max(1, floor - floors_down), walls, P) >= base


def test_snr_without_shadowing():
    q = LinkBudgetParams(shadowing_sigma=0.0)
    assert rx_snr(np.random.default_rng(0), 14.0, 100.0, q) == pytest.approx(31.03, abs=0.005)
    assert rx_snr(None, 14.0, math.inf, q) == -math.inf


def test_shadowing_moments_and_independence():
    rng = np.random.default_rng(17)
    snr = rx_snr(rng, 14.0, np.full(1_000_000, 120.0), P)
    assert snr.std() == pytest.approx(7.8, rel=0.01)
    assert snr.mean() == pytest.approx(14.0 - 120.0 - noise_floor(P), abs=0.05)
    # successive draws for one link
    seq = np.array([rx_snr(rng, 14.0, 120.0, P) for _ in range(100_000)])
    x = seq - seq.mean()
    lag1 = np.dot(x[:-1], x[1:]) / np.dot(x, x)
    assert abs(lag1) < 0.01


def test_from_config():
    q = LinkBudgetParams.from_config(SimConfig(shadowing_sigma=3.0, wall_loss=4.0))
    assert q.shadowing_sigma == 3.0 and q.wall_loss == 4.0
