"""Sensing and reporting link gains, energy-detector power, and closed-form detection rates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .config import RadioConfig


class NonFiniteRate(ArithmeticError):
    """A closed-form rate hit a zero or negative denominator."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def path_gain(distance: np.ndarray, exponent: float, reference: float) -> np.ndarray:
    """Deterministic power gain, 1 up to ``reference`` metres then distance^-exponent."""
    d = np.maximum(np.asarray(distance, dtype=float), reference)
    return (d / reference) ** (-exponent)


def correlation_groups(positions: np.ndarray, radius: float) -> np.ndarray:
    """Label points so that any two within ``radius`` share a label (single linkage)."""
    n = len(positions)
    parent = np.arange(n)

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    if n:
        d = np.linalg.norm(positions[:, None, :] - positions[None, :, :], axis=-1)
        for a, b in zip(*np.nonzero(np.triu(d <= radius, 1))):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(a) for a in range(n)], dtype=int)
    _, labels = np.unique(roots, return_inverse=True)
    return labels


@dataclass(frozen=True)
class LinkGain:
    beta_sen: np.ndarray  # (n_is, J, S) sensor <- incumbent
    beta_rep: np.ndarray  # (J, S) sensor -> own base station; slot 0 (the BS) is 1
    valid_from: int
    valid_until: int  # inclusive frame index


class FadingProcess:
    """Slow-fading link gains, redrawn only at multiples of ``slow_fading_hold`` frames.

    Shadowing is drawn per correlation group (sensors within
    ``shadowing_corr_distance`` of each other share one draw), Rayleigh power
    per link.
    """

    def __init__(self, is_distance: np.ndarray, sensor_positions: np.ndarray,
                 radio: RadioConfig, rng: np.random.Generator,
                 report_rng: np.random.Generator | None = None):
        self.radio = radio
        self.rng = rng
        self.report_rng = rng if report_rng is None else report_rng
        n_is, J, S = is_distance.shape
        self.shape = (n_is, J, S)
        self.sen_path = path_gain(is_distance, radio.path_loss_exponent, radio.reference_distance)
        bs = sensor_positions[:, :1, :]
        rep_dist = np.linalg.norm(sensor_positions - bs, axis=-1)
        self.rep_path = path_gain(rep_dist, radio.path_loss_exponent, radio.reference_distance)
        flat = sensor_positions.reshape(J * S, 2)
        self.groups = correlation_groups(flat, radio.shadowing_corr_distance).reshape(J, S)
        self.n_groups = int(self.groups.max()) + 1 if self.groups.size else 0
        self._block = -1
        self._gain: LinkGain | None = None

    def _shadow(self, lead: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
        sigma = self.radio.shadowing_sigma
        per_group = rng.normal(0.0, sigma, lead + (self.n_groups,))
        return 10.0 ** (per_group[..., self.groups] / 10.0)

    def gains(self, frame: int) -> LinkGain:
        if frame < 0:
            raise ValueError("frame must be >= 0")
        hold = self.radio.slow_fading_hold
        block = frame // hold
        if block != self._block:
            n_is, J, S = self.shape
            sen = self.sen_path * self._shadow((n_is,), self.rng) * self.rng.exponential(1.0, self.shape)
            rr = self.report_rng
            rep = self.rep_path * self._shadow((), rr) * rr.exponential(1.0, (J, S))
            rep[:, 0] = 1.0
            self._gain = LinkGain(sen, rep, block * hold, block * hold + hold - 1)
            self._block = block
        return self._gain


def draw_link_gains(process: FadingProcess, frame: int) -> LinkGain:
    return process.gains(frame)


def incumbent_power(radio: RadioConfig, tx_power: np.ndarray) -> np.ndarray:
    """Per-station transmit power: either set by the transmit-SNR knob or taken as configured."""
    if radio.tx_snr_db is None:
        return np.asarray(tx_power, dtype=float)
    return np.full(len(tx_power), radio.noise_power * db_to_linear(radio.tx_snr_db))


def received_power(beta_sen: np.ndarray, audible_active: np.ndarray, is_power: np.ndarray,
                   channel_onehot: np.ndarray) -> np.ndarray:
    """(J, S, K) superimposed incumbent power at every sensor on every channel."""
    per_is = beta_sen * audible_active * is_power[:, None, None]
    return np.einsum("njs,nk->jsk", per_is, channel_onehot.astype(float))


def sense_power(audible_powers, noise_power: float, samples: int,
                rng: np.random.Generator) -> float:
    """Energy-detector statistic from explicit baseband samples.

    ``audible_powers`` are received powers of the audible active stations
    (P_IS times sensing gain); each contributes an independent unit-power
    complex Gaussian waveform, noise is complex Gaussian of power ``noise_power``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")

    def cgauss(shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)

    y = np.sqrt(noise_power) * cgauss(samples)
    for p in np.atleast_1d(np.asarray(audible_powers, dtype=float)):
        y = y + np.sqrt(p) * cgauss(samples)
    return float(np.sum(np.abs(y) ** 2))


def sense_power_batch(rx_power: np.ndarray, noise_power: float, samples: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Same distribution as :func:`sense_power`, drawn in closed form.

    A sum of M squared complex Gaussians of total power P is P * Gamma(M, 1).
    """
    return (noise_power + rx_power) * rng.standard_gamma(samples, np.shape(rx_power))


def threshold_snr(radio: RadioConfig) -> float:
    """Detection threshold as a noise-normalised value lambda / S_N.

    Uses ``snr_min`` when configured, otherwise the level giving a false-alarm
    probability of ``pfa_target`` for the exact Gamma(M) noise statistic.
    """
    if radio.snr_min is not None:
        return float(radio.snr_min)
    return float(stats.gamma.isf(radio.pfa_target, radio.samples_per_sensing))


def analytic_rates(snr_inst, snr_min: float, samples: int, beta_sen=1.0,
                   variant: str = "printed") -> tuple[np.ndarray, np.ndarray]:
    """Closed-form (P_MD, P_FA) approximations, clamped to [0, 1].

    ``printed`` follows the published expressions literally;
    ``standard`` is the textbook Gaussian approximation of the energy detector.
    """
    if samples < 1 or not snr_min > 0:
        raise ValueError("need samples >= 1 and snr_min > 0")
    snr = np.asarray(snr_inst, dtype=float)
    beta = np.asarray(beta_sen, dtype=float)
    M = float(samples)
    with np.errstate(divide="ignore", invalid="ignore"):
        if variant == "printed":
            ratio = snr / beta
            md_arg = (snr_min - (1.0 + snr) / beta * M) / np.sqrt(M * ((ratio + 2.0) ** 2 - 2.0))
            fa_arg = (snr_min - M) / (np.sqrt(2.0) * M)
        elif variant == "standard":
            md_arg = (snr_min - M * (1.0 + snr)) / (np.sqrt(M) * (1.0 + snr))
            fa_arg = (snr_min - M) / np.sqrt(M)
        else:
            raise ValueError(f"unknown variant {variant!r}")
    if not (np.all(np.isfinite(md_arg)) and np.all(np.isfinite(fa_arg))):
        raise NonFiniteRate("non-finite argument in closed-form rates")
    p_md = np.clip(1.0 - stats.norm.sf(md_arg), 0.0, 1.0)
    p_fa = np.clip(stats.norm.sf(fa_arg) * np.ones_like(md_arg), 0.0, 1.0)
    return p_md, p_fa


def report_delivered(beta_rep: np.ndarray, radio: RadioConfig) -> np.ndarray:
    """A report arrives when its link SNR clears the reception threshold."""
    link_db = radio.report_tx_snr_db + 10.0 * np.log10(np.maximum(beta_rep, 1e-300))
    return link_db >= radio.report_threshold_db
