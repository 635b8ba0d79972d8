"""Decision combining: reward-penalty scores, discounted confidence, indicators,
the reporting-gain-weighted central decision, hard-decision baselines and
adaptive tuning of the temporal parameters.

Scalar functions mirror the per-sensor definitions; :class:`FusionBank`
holds the same state for every (cell, sensor, channel) at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import adapt_constant_problems

BASELINES = ("AND", "OR", "VOTING")


class EmptyDecisions(ValueError):
    pass


@dataclass(frozen=True)
class TemporalParams:
    alpha: float
    historic_count: int


def score(d, D_prev, R, gamma, zeta):
    """Reward (positive) or penalty (negative) for a local decision.

    Agreeing with the database earns ``gamma``, or ``zeta`` when the previous
    central decision disagreed with the database; disagreeing costs ``-zeta``
    when the previous central decision sided with the sensor, ``-gamma``
    otherwise.  Works elementwise on {0, 1} arrays.
    """
    d = np.asarray(d, dtype=np.int64)
    D = np.asarray(D_prev, dtype=np.int64)
    R = np.asarray(R, dtype=np.int64)
    agree = 1 - (d ^ R)  # XNOR
    differ = d ^ R  # XOR
    nd, nD, nR = 1 - d, 1 - D, 1 - R
    return gamma * (agree - differ) - (zeta - gamma) * (nd - d) * (nD * R - D * nR)


def confidence(history: Sequence[float], alpha: float, historic_count: int) -> float:
    """Discounted sum of the most recent ``historic_count`` scores.

    ``history`` is ordered oldest first; the newest score gets weight ``alpha``,
    the one before ``alpha**2`` and so on.  Short histories sum what exists.
    """
    recent = list(history)[::-1][:historic_count]
    return float(sum(alpha ** (s + 1) * L for s, L in enumerate(recent)))


def indicator(w, d):
    """Signed indicator: the confidence itself for a busy decision, its negation for idle."""
    return np.where(np.asarray(d) == 1, w, -np.asarray(w))


def combine(x_bs: float, contributions: Sequence[tuple[float, float]]) -> int:
    """Central decision: busy iff the BS indicator plus gain-weighted CPE indicators is positive."""
    total = x_bs + sum(beta * x for x, beta in contributions)
    return int(total > 0)


def default_quorum(n: int) -> int:
    """Majority over ``n`` decisions, i.e. ceil((m + 1) / 2) with ``n = m + 1``."""
    return math.ceil(n / 2)


def baseline_combine(rule: str, decisions: Sequence[int], quorum: int | None = None) -> int:
    decisions = [int(x) for x in decisions]
    if not decisions:
        raise EmptyDecisions("no decisions to combine")
    ones = sum(decisions)
    if rule == "AND":
        return int(ones == len(decisions))
    if rule == "OR":
        return int(ones > 0)
    if rule == "VOTING":
        q = default_quorum(len(decisions)) if quorum is None else quorum
        if not 1 <= q <= len(decisions):
            raise ValueError("quorum must lie in [1, number of decisions]")
        return int(ones >= q)
    raise ValueError(f"unknown rule {rule!r}")


def baseline_batch(rule: str, d: np.ndarray, include: np.ndarray, quorum: int | None = None,
                   axis: int = 1) -> np.ndarray:
    """Vectorised baselines; ``include`` masks which decisions take part."""
    n = include.sum(axis=axis)
    ones = (d.astype(bool) & include).sum(axis=axis)
    if rule == "AND":
        out = (ones == n) & (n > 0)
    elif rule == "OR":
        out = ones > 0
    elif rule == "VOTING":
        q = np.ceil(n / 2) if quorum is None else np.minimum(quorum, n)
        out = (ones >= q) & (n > 0)
    else:
        raise ValueError(f"unknown rule {rule!r}")
    return out.astype(np.int8)


def adapt(p_md_bar, p_fa_bar, a: float, b: float, c: float, d: float, eps: float = 1e-6):
    """Map windowed error rates to (alpha, N).

    N = max(1, floor(b - a * p_md)); alpha = c + d * p_fa clamped into (0, 1).
    Works elementwise and returns ``(alpha, N)`` arrays for array input.
    """
    problems = adapt_constant_problems(a, b, c, d)
    if problems:
        raise ValueError("; ".join(problems))
    N = np.maximum(1, np.floor(b - a * np.asarray(p_md_bar, dtype=float))).astype(int)
    alpha = np.clip(c + d * np.asarray(p_fa_bar, dtype=float), eps, 1 - eps)
    if np.ndim(N) == 0:
        return TemporalParams(float(alpha), int(N))
    return alpha, N


class FusionBank:
    """MC-LDS state for every (cell, sensor, channel).

    ``hist[..., s]`` holds the score from ``s + 1`` QPs ago; ``filled`` counts
    valid entries.  Only sensors that took part in a QP get a new score.
    """

    def __init__(self, shape: tuple[int, int, int], max_count: int, gamma, zeta,
                 alpha: float, historic_count: int):
        J, S, K = shape
        self.max_count = int(max_count)
        self.hist = np.zeros(shape + (self.max_count,))
        self.filled = np.zeros(shape, dtype=np.int64)
        self.gamma = np.broadcast_to(np.asarray(gamma, float), (K,))
        self.zeta = np.broadcast_to(np.asarray(zeta, float), (K,))
        self.alpha = np.full((J, K), float(alpha))
        self.N = np.full((J, K), int(historic_count), dtype=np.int64)
        self.D_prev = np.zeros((J, K), dtype=np.int8)
        self.started = np.zeros((J, K), dtype=bool)
        self._lags = np.arange(1, self.max_count + 1)
        # score lookup: row 4d + 2D + R, column channel
        dDR = np.array([(c >> 2, (c >> 1) & 1, c & 1) for c in range(8)])
        self._table = score(dDR[:, :1], dDR[:, 1:2], dDR[:, 2:], self.gamma, self.zeta)
        self._k = np.arange(K)

    def confidence(self) -> np.ndarray:
        """Current w for every (cell, sensor, channel).

        History slots past ``filled`` are still zero, so only the ``N`` cut-off
        needs masking.
        """
        coef = self.alpha[..., None] ** self._lags * (self._lags <= self.N[..., None])
        return np.einsum("jskl,jkl->jsk", self.hist, coef)

    def step(self, d: np.ndarray, R: np.ndarray, weight: np.ndarray, active: np.ndarray,
             qp: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """One QP for every (cell, channel) flagged in ``qp``.

        ``d``: (J, S, K) local decisions; ``weight``: (J, S, K) reporting weight
        (0 for lost reports); ``active``: (J, S, K) which sensors sensed;
        ``R``: (J, K) database readings.  Returns ``(D, w, X)``.
        """
        w = self.confidence()
        X = np.where(d == 1, w, -w) * active
        total = np.einsum("jsk,jsk->jk", X, weight)
        D = (total > 0).astype(np.int8)
        D_prev = np.where(self.started, self.D_prev, R).astype(np.int8)
        L = self._table[4 * d + (2 * D_prev + R)[:, None, :], self._k]
        upd = active & qp[:, None, :]
        shifted = np.empty_like(self.hist)
        shifted[..., 1:] = self.hist[..., :-1]
        shifted[..., 0] = L
        self.hist = np.where(upd[..., None], shifted, self.hist)
        self.filled = np.where(upd, np.minimum(self.filled + 1, self.max_count), self.filled)
        self.D_prev = np.where(qp, D, self.D_prev).astype(np.int8)
        self.started |= qp
        self.last_total = total
        return D, w, X
