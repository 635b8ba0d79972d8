"""Incumbent ON/OFF activity, coverage geometry and the factual channel status Z."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import IncumbentStation

PARETO_SHAPE = 1.5


def draw_sojourns(mean: float, burstiness: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` sojourn lengths with the given mean.

    Each draw is heavy-tailed (Pareto, shape 1.5, scale matched to ``mean``)
    with probability ``burstiness`` and exponential otherwise, so the mean is
    preserved for every mixing weight.
    """
    expo = rng.exponential(mean, n)
    scale = mean * (PARETO_SHAPE - 1) / PARETO_SHAPE
    pareto = scale * (1.0 + rng.pareto(PARETO_SHAPE, n))
    heavy = rng.random(n) < burstiness
    return np.where(heavy, pareto, expo)


@dataclass(frozen=True)
class ActivityState:
    on: bool
    remaining: float  # seconds left in the current sojourn


def initial_state(mean_on: float, mean_off: float, burstiness: float,
                  rng: np.random.Generator) -> ActivityState:
    on = bool(rng.random() < mean_on / (mean_on + mean_off))
    dur = draw_sojourns(mean_on if on else mean_off, burstiness, 1, rng)[0]
    return ActivityState(on=on, remaining=float(dur))


def step_activity(state: ActivityState, elapsed: float, mean_on: float, mean_off: float,
                  burstiness: float, rng: np.random.Generator
                  ) -> tuple[ActivityState, list[tuple[float, bool]]]:
    """Advance one alternating renewal process by ``elapsed`` seconds.

    Returns the new state and the ``(duration, on)`` segments covering the
    interval, in order.  Segment durations sum to ``elapsed``.
    """
    if not elapsed > 0:
        raise ValueError("elapsed must be positive")
    segments: list[tuple[float, bool]] = []
    left = float(elapsed)
    on, rem = state.on, state.remaining
    while rem <= left:
        segments.append((rem, on))
        left -= rem
        on = not on
        rem = float(draw_sojourns(mean_on if on else mean_off, burstiness, 1, rng)[0])
    if left > 0:
        segments.append((left, on))
        rem -= left
    return ActivityState(on=on, remaining=rem), segments


def frame_activity(mean_on: float, mean_off: float, burstiness: float, n_frames: int,
                   frame_len: float, rng: np.random.Generator) -> np.ndarray:
    """Boolean ON flag per frame for one station.

    Sojourns are rounded up to whole frames (at least one), so a frame that
    overlaps any ON time counts as ON.
    """
    out = np.zeros(n_frames, dtype=bool)
    if n_frames == 0:
        return out
    on = bool(rng.random() < mean_on / (mean_on + mean_off))
    pos = 0
    # draw in batches: expected count per batch covers the horizon comfortably
    batch = max(16, int(2 * n_frames * frame_len / (mean_on + mean_off)) + 16)
    while pos < n_frames:
        ons = draw_sojourns(mean_on, burstiness, batch, rng)
        offs = draw_sojourns(mean_off, burstiness, batch, rng)
        for a, b in zip(ons, offs):
            first, second = (a, b) if on else (b, a)
            n1 = max(1, math.ceil(first / frame_len))
            if on:
                out[pos:pos + n1] = True
            pos += n1
            n2 = max(1, math.ceil(second / frame_len))
            if not on:
                out[pos:pos + n2] = True
            pos += n2
            if pos >= n_frames:
                break
    return out


# -- geometry -------------------------------------------------------------------

@dataclass(frozen=True)
class Coverage:
    """Static incumbent geometry for one topology.

    ``covers_cell[n, j]``: station ``n``'s disk intersects cell ``j``'s disk.
    ``audible[n, j, s]``: sensor ``s`` of cell ``j`` lies inside station ``n``'s disk.
    """

    channel: np.ndarray  # (n_is,), 1-based
    tx_power: np.ndarray  # (n_is,)
    keepout: np.ndarray  # (n_is,) bool
    covers_cell: np.ndarray  # (n_is, J) bool
    audible: np.ndarray  # (n_is, J, S) bool
    distance: np.ndarray  # (n_is, J, S) metres


def coverage(stations: tuple[IncumbentStation, ...], centers: np.ndarray, cell_radius: float,
             sensor_positions: np.ndarray) -> Coverage:
    n = len(stations)
    J, S = sensor_positions.shape[:2]
    if n == 0:
        return Coverage(np.zeros(0, int), np.zeros(0), np.zeros(0, bool), np.zeros((0, J), bool),
                        np.zeros((0, J, S), bool), np.zeros((0, J, S)))
    pos = np.array([s.position for s in stations], dtype=float)
    radius = np.array([s.coverage_radius for s in stations], dtype=float)
    to_cell = np.linalg.norm(pos[:, None, :] - centers[None, :, :], axis=-1)
    to_sensor = np.linalg.norm(pos[:, None, None, :] - sensor_positions[None], axis=-1)
    return Coverage(
        channel=np.array([s.channel for s in stations], dtype=int),
        tx_power=np.array([s.tx_power for s in stations], dtype=float),
        keepout=np.array([s.keepout for s in stations], dtype=bool),
        covers_cell=to_cell <= radius[:, None] + cell_radius,
        audible=to_sensor <= radius[:, None, None],
        distance=to_sensor,
    )


def channel_onehot(cov: Coverage, num_channels: int) -> np.ndarray:
    """(n_is, K) indicator of each station's channel."""
    out = np.zeros((len(cov.channel), num_channels), dtype=bool)
    out[np.arange(len(cov.channel)), cov.channel - 1] = True
    return out


def ground_truth(cov: Coverage, is_on: np.ndarray, num_channels: int
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Factual status for one QP.

    Returns ``Z`` of shape (J, K): 1 iff an ON station on channel k covers any
    part of cell j; and the audible-active mask (n_is, J, S) used to
    superimpose received power at each sensor.
    """
    onehot = channel_onehot(cov, num_channels)
    active_cover = cov.covers_cell & np.asarray(is_on, bool)[:, None]  # (n_is, J)
    Z = (active_cover.T.astype(np.int64) @ onehot.astype(np.int64)) > 0
    audible = cov.audible & np.asarray(is_on, bool)[:, None, None]
    return Z.astype(np.int8), audible


def keepout_channels(cov: Coverage, cell: int) -> set[int]:
    """Channels a keep-out station reserves over ``cell`` (the DCL seed)."""
    hit = cov.keepout & cov.covers_cell[:, cell] if len(cov.channel) else np.zeros(0, bool)
    return {int(k) for k in cov.channel[hit]}
