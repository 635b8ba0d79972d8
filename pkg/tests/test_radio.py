import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import optimize

from mclds.config import RadioConfig
from mclds.radio import (FadingProcess, NonFiniteRate, analytic_rates, path_gain,
                         report_delivered, sense_power, sense_power_batch, threshold_snr)


def _process(hold=5, positions=None, distance=None, seed=0):
    radio = RadioConfig(slow_fading_hold=hold)
    if positions is None:
        positions = np.array([[[0.0, 0.0], [500.0, 0.0], [500.0, 0.0]]])
    if distance is None:
        distance = np.full((1,) + positions.shape[:2], 5000.0)
    return FadingProcess(distance, positions, radio, np.random.default_rng(seed))


def test_gains_held_across_the_hold_window():
    proc = _process(hold=5)
    first = proc.gains(0)
    for f in range(1, 5):
        assert np.array_equal(proc.gains(f).beta_sen, first.beta_sen)
    assert (first.valid_from, first.valid_until) == (0, 4)
    assert not np.array_equal(proc.gains(5).beta_sen, first.beta_sen)


def test_colocated_cpes_share_shadowing():
    proc = _process()
    shadow = proc._shadow((3,), np.random.default_rng(1))
    assert np.array_equal(shadow[..., 0, 1], shadow[..., 0, 2])
    assert proc.groups[0, 1] == proc.groups[0, 2]


def test_doubling_distance_divides_mean_gain_by_sixteen():
    pos = np.zeros((1, 2, 2))
    pos[0, 1] = [1e4, 0.0]  # far apart, so shadowing is independent
    dist = np.array([[[4000.0, 8000.0]]])
    radio = RadioConfig(slow_fading_hold=1, shadowing_sigma=0.0)
    proc = FadingProcess(dist, pos, radio, np.random.default_rng(2))
    g = np.array([proc.gains(f).beta_sen[0, 0] for f in range(10_000)])
    ratio = g[:, 1].mean() / g[:, 0].mean()
    assert ratio == pytest.approx(2.0 ** -4, rel=0.05)
    assert path_gain(8000.0, 4, 1000.0) / path_gain(4000.0, 4, 1000.0) == pytest.approx(1 / 16)


@pytest.mark.parametrize("powers,factor", [((), 1.0), ((1.0,), 2.0), ((1.0, 1.0), 3.0)])
def test_sensed_power_expectation(powers, factor):
    rng = np.random.default_rng(3)
    M, noise = 20, 1.0
    vals = [sense_power(powers, noise, M, rng) for _ in range(10_000)]
    assert np.mean(vals) == pytest.approx(factor * M * noise, rel=0.02)


def test_batch_power_matches_sample_level_distribution():
    rng = np.random.default_rng(4)
    batch = sense_power_batch(np.full(20_000, 1.0), 1.0, 10, rng)
    direct = np.array([sense_power([1.0], 1.0, 10, rng) for _ in range(20_000)])
    assert batch.mean() == pytest.approx(direct.mean(), rel=0.02)
    assert batch.var() == pytest.approx(direct.var(), rel=0.06)


def test_misdetection_vanishes_at_high_snr():
    p_md, _ = analytic_rates(1e9, 60.0, 50)
    assert p_md == pytest.approx(0.0, abs=1e-12)


def test_false_alarm_ignores_instantaneous_snr():
    _, a = analytic_rates(0.1, 60.0, 50)
    _, b = analytic_rates(100.0, 60.0, 50)
    assert a == b


def test_false_alarm_half_at_zero_argument():
    M = 100
    root = optimize.brentq(lambda s: (s - M) / (np.sqrt(2) * M), 1.0, 1000.0)
    _, p_fa = analytic_rates(1.0, root, M)
    assert p_fa == pytest.approx(0.5, abs=1e-12)


def test_zero_denominator_signals():
    # (snr/beta + 2)^2 - 2 < 0 for snr/beta just below -2 + sqrt(2)
    with pytest.raises(NonFiniteRate):
        analytic_rates(-0.6, 10.0, 10)
    with pytest.raises(ValueError):
        analytic_rates(1.0, 0.0, 10)


@given(snr_min=st.floats(1.0, 500.0), M=st.integers(1, 200))
def test_closed_form_monotonicity(snr_min, M):
    for variant in ("printed", "standard"):
        grid = np.linspace(0.0, 50.0, 60)
        p_md, _ = analytic_rates(grid, snr_min, M, variant=variant)
        assert np.all(np.diff(p_md) <= 1e-12)
        _, fa_lo = analytic_rates(1.0, snr_min, M, variant=variant)
        _, fa_hi = analytic_rates(1.0, snr_min * 1.5, M, variant=variant)
        assert fa_hi <= fa_lo + 1e-15


def test_empirical_rates_track_standard_form_as_samples_grow():
    rng = np.random.default_rng(5)
    gaps = []
    for M in (5, 50, 500):
        lam = 1.3 * M
        emp_fa = np.mean(rng.standard_gamma(M, 40_000) >= lam)
        _, an_fa = analytic_rates(0.5, lam, M, variant="standard")
        gaps.append(abs(emp_fa - an_fa))
    assert gaps[2] <= gaps[0]


def test_threshold_from_gamma_quantile():
    radio = RadioConfig(samples_per_sensing=50, pfa_target=0.05)
    lam = threshold_snr(radio)
    rng = np.random.default_rng(6)
    assert np.mean(rng.standard_gamma(50, 200_000) >= lam) == pytest.approx(0.05, abs=0.003)
    assert threshold_snr(RadioConfig(snr_min=42.0)) == 42.0


def test_report_loss_threshold():
    radio = RadioConfig(report_tx_snr_db=80.0, report_threshold_db=-3.0)
    ok = report_delivered(np.array([1e-8, 1e-9]), radio)
    assert ok.tolist() == [True, False]
    radio_off = RadioConfig(report_threshold_db=float("-inf"))
    assert report_delivered(np.array([1e-30]), radio_off).all()
