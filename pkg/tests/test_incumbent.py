import numpy as np
import pytest
from hypothesis import given, strategies as st

from mclds.config import IncumbentStation
from mclds.incumbent import (coverage, draw_sojourns, frame_activity, ground_truth,
                             initial_state, step_activity)


def _busy_fraction(mean_on, mean_off, burst, total, seed=0):
    rng = np.random.default_rng(seed)
    state = initial_state(mean_on, mean_off, burst, rng)
    on_time = 0.0
    for _ in range(int(total // 1000)):
        state, segs = step_activity(state, 1000.0, mean_on, mean_off, burst, rng)
        on_time += sum(d for d, on in segs if on)
    return on_time / total


def test_symmetric_activity_is_busy_half_the_time():
    assert abs(_busy_fraction(2.0, 2.0, 0.0, 1e5) - 0.5) <= 0.02


def test_low_activity_ratio_busy_fraction():
    assert abs(_busy_fraction(1.0, 10.0, 0.0, 1e5) - 1 / 11) <= 0.01


def test_bursty_sojourns_keep_mean_and_raise_variance():
    rng = np.random.default_rng(1)
    calm = draw_sojourns(2.0, 0.0, 10_000, rng)
    bursty = draw_sojourns(2.0, 1.0, 10_000, rng)
    assert abs(bursty.mean() / calm.mean() - 1) < 0.1
    assert bursty.var() > calm.var()
    assert abs(_busy_fraction(2.0, 4.0, 1.0, 1e5, seed=3) - 1 / 3) <= 0.03


def test_step_activity_segments_cover_the_interval():
    rng = np.random.default_rng(2)
    state = initial_state(1.0, 1.0, 0.5, rng)
    state, segs = step_activity(state, 37.5, 1.0, 1.0, 0.5, rng)
    assert sum(d for d, _ in segs) == pytest.approx(37.5)
    assert all(a[1] != b[1] for a, b in zip(segs, segs[1:]))
    with pytest.raises(ValueError):
        step_activity(state, 0.0, 1.0, 1.0, 0.5, rng)


def test_frame_activity_busy_fraction():
    rng = np.random.default_rng(4)
    on = frame_activity(0.5, 1.5, 0.0, 200_000, 0.01, rng)
    assert abs(on.mean() - 0.25) < 0.03


def _geometry():
    centers = np.array([[0.0, 0.0], [10e3, 0.0], [40e3, 0.0]])
    sensors = np.stack([np.vstack([c, c + [100.0, 0.0]]) for c in centers])
    return centers, sensors


def test_no_station_on_a_channel_means_idle():
    centers, sensors = _geometry()
    st_ = (IncumbentStation(position=(0.0, 0.0), channel=1, coverage_radius=5e3),)
    cov = coverage(st_, centers, 3e3, sensors)
    Z, _ = ground_truth(cov, np.array([True]), 6)
    assert np.all(Z[:, 4] == 0)


def test_station_covering_two_cells():
    centers, sensors = _geometry()
    st_ = (IncumbentStation(position=(5e3, 0.0), channel=3, coverage_radius=4e3),)
    cov = coverage(st_, centers, 3e3, sensors)
    Z, _ = ground_truth(cov, np.array([True]), 6)
    assert Z[:, 2].tolist() == [1, 1, 0]
    Z_off, _ = ground_truth(cov, np.array([False]), 6)
    assert Z_off.sum() == 0


def test_overlapping_stations_are_both_audible():
    centers, sensors = _geometry()
    st_ = (IncumbentStation(position=(0.0, 0.0), channel=2, coverage_radius=5e3),
           IncumbentStation(position=(2e3, 0.0), channel=2, coverage_radius=5e3))
    cov = coverage(st_, centers, 3e3, sensors)
    _, audible = ground_truth(cov, np.array([True, True]), 6)
    assert audible[:, 0, 1].all()


@given(r1=st.floats(1e3, 5e4), grow=st.floats(0, 5e4), x=st.floats(-5e4, 5e4),
       ch=st.integers(1, 6))
def test_larger_coverage_never_clears_a_busy_entry(r1, grow, x, ch):
    centers, sensors = _geometry()
    small = coverage((IncumbentStation((x, 0.0), ch, r1),), centers, 3e3, sensors)
    big = coverage((IncumbentStation((x, 0.0), ch, r1 + grow),), centers, 3e3, sensors)
    Zs, _ = ground_truth(small, np.array([True]), 6)
    Zb, _ = ground_truth(big, np.array([True]), 6)
    assert np.all(Zb >= Zs)


def test_channels_are_independent():
    rng = np.random.default_rng(9)
    a = frame_activity(1.0, 2.0, 0.5, 100_000, 0.01, rng).astype(float)
    b = frame_activity(1.0, 2.0, 0.5, 100_000, 0.01, rng).astype(float)
    r = np.corrcoef(a, b)[0, 1]
    # permutation null for autocorrelated streams: shift b circularly
    null = [np.corrcoef(a, np.roll(b, s))[0, 1] for s in range(5000, 95_000, 3000)]
    assert abs(r) <= 3 * np.std(null) + 1e-3
