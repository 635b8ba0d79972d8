"""Windowed detection-quality measures.

Every measure here depends on a window only through its four joint counts
of (D, Z): ``n11`` (busy called busy), ``n10`` (idle called busy),
``n01`` (busy called idle) and ``n00``.  Functions accept raw streams; the
``*_counts`` variants work on count arrays of any leading shape.
"""
from __future__ import annotations

import numpy as np

PERF_FIELDS = ("nwcf", "p_sd", "p_md", "p_fa", "chi2")


class EmptyWindow(ValueError):
    pass


class Undefined(ValueError):
    pass


class AllNA(ValueError):
    pass


def joint_counts(D, Z) -> np.ndarray:
    """[n00, n01, n10, n11] indexed by 2*D + Z."""
    D = np.asarray(D, dtype=np.int64)
    Z = np.asarray(Z, dtype=np.int64)
    return np.bincount(2 * D + Z, minlength=4)[:4]


def window_rates(D, Z, literal_eq13: bool = False) -> tuple[float, float, float]:
    """(p_fa, p_md, p_sd) over one window.

    By default the false-alarm rate counts idle slots declared busy; with
    ``literal_eq13`` it counts busy slots declared busy, as originally printed.
    """
    if len(D) == 0:
        raise EmptyWindow("window is empty")
    c = joint_counts(D, Z)
    return tuple(float(x) for x in rates_from_counts(c, literal_eq13))


def rates_from_counts(c: np.ndarray, literal_eq13: bool = False):
    c = np.asarray(c, dtype=float)
    n00, n01, n10, n11 = c[..., 0], c[..., 1], c[..., 2], c[..., 3]
    n = n00 + n01 + n10 + n11
    with np.errstate(invalid="ignore", divide="ignore"):
        p_fa = (n11 if literal_eq13 else n10) / n
        p_md = n01 / n
        p_sd = (n11 + n00) / n
    return p_fa, p_md, p_sd


def chi2_from_counts(c: np.ndarray, mode: str = "counts") -> np.ndarray:
    """Goodness of fit of D against Z; NaN where undefined."""
    c = np.asarray(c, dtype=float)
    n00, n01, n10, n11 = c[..., 0], c[..., 1], c[..., 2], c[..., 3]
    with np.errstate(invalid="ignore", divide="ignore"):
        if mode == "counts":
            obs1, exp1 = n11 + n10, n11 + n01
            obs0, exp0 = n00 + n01, n00 + n10
            t1 = np.where(exp1 > 0, (obs1 - exp1) ** 2 / exp1, 0.0)
            t0 = np.where(exp0 > 0, (obs0 - exp0) ** 2 / exp0, 0.0)
            return np.where((exp1 > 0) | (exp0 > 0), t1 + t0, np.nan)
        if mode == "literal":
            # (D - 1)^2 / 1 summed over busy slots; idle slots divide by zero and are skipped
            return np.where(n11 + n01 > 0, n01, np.nan)
    raise ValueError(f"unknown chi2 mode {mode!r}")


def pearson_chi2(D, Z, mode: str = "counts") -> float:
    if len(D) == 0:
        raise EmptyWindow("window is empty")
    val = chi2_from_counts(joint_counts(D, Z), mode)
    if np.isnan(val):
        raise Undefined("no category with a positive expected count")
    return float(val)


def phi_from_counts(c: np.ndarray) -> np.ndarray:
    """Binary correlation coefficient; constant streams score 1 if identical, else 0."""
    c = np.asarray(c, dtype=float)
    n00, n01, n10, n11 = c[..., 0], c[..., 1], c[..., 2], c[..., 3]
    d1, d0 = n11 + n10, n00 + n01
    z1, z0 = n11 + n01, n00 + n10
    denom = d1 * d0 * z1 * z0
    with np.errstate(invalid="ignore", divide="ignore"):
        phi = (n11 * n00 - n10 * n01) / np.sqrt(denom)
    identical = (n10 + n01) == 0
    n = n00 + n01 + n10 + n11
    out = np.where(denom > 0, phi, np.where(identical, 1.0, 0.0))
    return np.where(n > 0, np.clip(out, -1.0, 1.0), np.nan)


def correlation_and_nwcf(windows: dict, shape: tuple[int, int]) -> tuple[np.ndarray, float]:
    """Correlation matrix (NaN = NA) and its sample-count-weighted mean.

    ``windows`` maps (cell, channel) indices to ``(D, Z)`` streams.
    """
    C = np.full(shape, np.nan)
    weights = np.zeros(shape)
    for (j, k), (D, Z) in windows.items():
        if len(D) == 0:
            continue
        C[j, k] = phi_from_counts(joint_counts(D, Z))
        weights[j, k] = len(D)
    return C, nwcf(C, weights)


def nwcf(C: np.ndarray, weights: np.ndarray) -> float:
    ok = ~np.isnan(C) & (weights > 0)
    if not ok.any():
        raise AllNA("no tracked (cell, channel) entries")
    return float(np.sum(C[ok] * weights[ok]) / np.sum(weights[ok]))


def check_thresholds(p_md: float, p_fa: float, limit_md: float = 0.1, limit_fa: float = 0.1
                     ) -> tuple[bool, bool]:
    """(misdetection flag, false-alarm flag); a flag needs a strict excess."""
    return bool(p_md > limit_md), bool(p_fa > limit_fa)


def perf_from_counts(c: np.ndarray, literal_eq13: bool = False, chi2_mode: str = "counts"
                     ) -> np.ndarray:
    """Stack [nwcf, p_sd, p_md, p_fa, chi2] along a new last axis."""
    p_fa, p_md, p_sd = rates_from_counts(c, literal_eq13)
    return np.stack([phi_from_counts(c), p_sd, p_md, p_fa, chi2_from_counts(c, chi2_mode)], axis=-1)


def network_scalars(perf: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted mean of each perf field over (cell, channel) entries that are defined."""
    out = np.full(perf.shape[:-3] + (perf.shape[-1],), np.nan)
    for f in range(perf.shape[-1]):
        vals = perf[..., f]
        ok = ~np.isnan(vals) & (weights > 0)
        wsum = np.where(ok, weights, 0).sum(axis=(-2, -1))
        with np.errstate(invalid="ignore", divide="ignore"):
            out[..., f] = np.where(ok, vals * weights, 0).sum(axis=(-2, -1)) / wsum
    return out


class WindowBank:
    """Sliding windows of (R, D, Z) codes for every (rule, cell, channel).

    Codes are ``4R + 2D + Z``; ``counts[..., code]`` is kept incrementally
    and always equals a recount of the buffer.
    """

    def __init__(self, n_rules: int, J: int, K: int, window: int):
        self.window = int(window)
        self.buf = np.zeros((n_rules, J, K, self.window), dtype=np.int8)
        self.pos = np.zeros((J, K), dtype=np.int64)
        self.fill = np.zeros((J, K), dtype=np.int64)
        self.counts = np.zeros((n_rules, J, K, 8), dtype=np.int64)
        self._r = np.arange(n_rules)[:, None]

    def push(self, D: np.ndarray, Z: np.ndarray, R: np.ndarray, mask: np.ndarray) -> None:
        """Append one QP; ``D`` is (rules, J, K), ``Z``/``R``/``mask`` are (J, K)."""
        j, k = np.nonzero(mask)
        if j.size == 0:
            return
        code = (4 * R[j, k] + 2 * D[:, j, k] + Z[j, k]).astype(np.int64)  # (rules, n)
        p = self.pos[j, k]
        full = self.fill[j, k] >= self.window
        old = self.buf[:, j, k, p].astype(np.int64)
        r = np.broadcast_to(self._r, code.shape)
        jj = np.broadcast_to(j, code.shape)
        kk = np.broadcast_to(k, code.shape)
        fr, fj, fk, fo = r[:, full], jj[:, full], kk[:, full], old[:, full]
        np.subtract.at(self.counts, (fr, fj, fk, fo), 1)
        np.add.at(self.counts, (r, jj, kk, code), 1)
        self.buf[:, j, k, p] = code
        self.pos[j, k] = (p + 1) % self.window
        self.fill[j, k] = np.minimum(self.fill[j, k] + 1, self.window)

    def dz_counts(self, reference: str = "truth") -> np.ndarray:
        """(rules, J, K, 4) counts of (D, Z), or of (D, R) for ``reference='database'``."""
        c = self.counts.reshape(self.counts.shape[:-1] + (2, 2, 2))  # R, D, Z
        if reference == "truth":
            return c.sum(axis=-3).reshape(c.shape[:-3] + (4,))
        return c.sum(axis=-1).transpose(0, 1, 2, 4, 3).reshape(c.shape[:-3] + (4,))

    def busy_fraction_r(self) -> np.ndarray:
        """Fraction of database readings equal to 1 per (cell, channel); NaN when empty."""
        c = self.counts[0].reshape(self.counts.shape[1:3] + (2, 4)).sum(axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return c[..., 1] / c.sum(axis=-1)

    def recount(self) -> np.ndarray:
        """Counts recomputed from scratch (for consistency checks)."""
        out = np.zeros_like(self.counts)
        for j in range(self.buf.shape[1]):
            for k in range(self.buf.shape[2]):
                n = self.fill[j, k]
                if n == 0:
                    continue
                if n < self.window:
                    codes = self.buf[:, j, k, :n]
                else:
                    codes = self.buf[:, j, k, :]
                for r in range(self.buf.shape[0]):
                    out[r, j, k] = np.bincount(codes[r].astype(np.int64), minlength=8)
        return out
