"""Per-sensor decision binarization with a one-feature logistic model.

The model maps received power S to a busy probability.  Fitting maximises
the Bernoulli log-likelihood (minus an optional ridge term) with Newton steps
and backtracking.  Power values are tiny in watts, so the solver works on a
standardised feature and maps the parameters back; the ridge term is applied
in those standardised coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit, logit


class DegenerateLabels(ValueError):
    """All labels identical, so the likelihood has no finite maximiser."""


class NotConverged(RuntimeError):
    pass


class FlatPredictor(ValueError):
    """Slope is not positive, so no lower-bounded decision region exists."""


@dataclass(frozen=True)
class LogisticParams:
    theta0: float
    theta1: float  # per watt


@dataclass(frozen=True)
class DecisionRegion:
    lower_bound: float  # region is [lower_bound, inf)


def sigmoid(S, theta: LogisticParams):
    return expit(theta.theta0 + theta.theta1 * np.asarray(S, dtype=float))


def neg_log_likelihood(theta: np.ndarray, S: np.ndarray, d: np.ndarray, ridge: float = 0.0) -> float:
    """Negative Bernoulli log-likelihood of ``(theta0, theta1)`` plus ``ridge * |theta|^2``."""
    eta = theta[0] + theta[1] * S
    ll = np.sum(d * log_expit(eta) + (1 - d) * log_expit(-eta))
    return float(-ll + ridge * np.dot(theta, theta))


def nll_gradient(theta: np.ndarray, S: np.ndarray, d: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    r = expit(theta[0] + theta[1] * S) - d
    return np.array([r.sum(), (r * S).sum()]) + 2.0 * ridge * np.asarray(theta)


def _standardise(S: np.ndarray) -> tuple[float, float]:
    mu = float(np.mean(S))
    sd = float(np.std(S))
    return mu, (sd if sd > 0 else 1.0)


def _to_raw(phi: np.ndarray, mu, sd) -> tuple:
    theta1 = phi[..., 1] / sd
    return phi[..., 0] - theta1 * mu, theta1


def fit_mle(S, d, ridge: float = 1e-3, tol: float = 1e-8, max_iter: int = 200) -> LogisticParams:
    """Maximum-likelihood logistic parameters for labelled powers ``(S, d)``.

    Convergence requires both a gradient norm at most ``tol`` and a Newton
    step that has stopped moving; on separable data without ridge the
    parameters run off to infinity and ``NotConverged`` is raised.
    """
    S = np.asarray(S, dtype=float)
    d = np.asarray(d, dtype=float)
    if S.size == 0:
        raise DegenerateLabels("empty training set")
    if d.min() == d.max():
        raise DegenerateLabels("training labels are all identical")
    mu, sd = _standardise(S)
    z = (S - mu) / sd
    phi = np.zeros(2)
    f = neg_log_likelihood(phi, z, d, ridge)
    for _ in range(max_iter):
        g = nll_gradient(phi, z, d, ridge)
        p = expit(phi[0] + phi[1] * z)
        w = p * (1 - p)
        H = np.array([[w.sum(), (w * z).sum()], [(w * z).sum(), (w * z * z).sum()]])
        H += 2.0 * ridge * np.eye(2)
        # least squares keeps the Newton step defined when S is constant and ridge is 0
        step = np.linalg.lstsq(H, g, rcond=None)[0]
        if np.linalg.norm(g) <= tol and np.linalg.norm(step) <= np.sqrt(tol) * (1 + np.linalg.norm(phi)):
            theta0, theta1 = _to_raw(phi, mu, sd)
            return LogisticParams(float(theta0), float(theta1))
        t = 1.0
        while True:
            cand = phi - t * step
            fc = neg_log_likelihood(cand, z, d, ridge)
            # slack absorbs rounding once the objective is flat to machine precision
            if fc <= f - 1e-4 * t * np.dot(g, step) + 1e-12 * (1 + abs(f)) or t < 1e-10:
                break
            t *= 0.5
        phi, f = cand, fc
    raise NotConverged(f"no convergence within {max_iter} Newton iterations")


def fit_mle_batch(S: np.ndarray, d: np.ndarray, mask: np.ndarray, ridge: float = 1e-3,
                  tol: float = 1e-8, max_iter: int = 200) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised :func:`fit_mle` over the leading axis.

    ``S``, ``d`` and ``mask`` have shape (B, n); ``mask`` selects valid
    samples per row.  Returns ``(theta0, theta1, ok)``; rows with degenerate
    labels or no convergence have ``ok = False`` and NaN parameters.
    """
    S = np.asarray(S, dtype=float)
    d = np.asarray(d, dtype=float)
    m = np.asarray(mask, dtype=float)
    cnt = m.sum(axis=1)
    safe = np.maximum(cnt, 1)
    mu = (S * m).sum(axis=1) / safe
    var = (((S - mu[:, None]) ** 2) * m).sum(axis=1) / safe
    sd = np.where(var > 0, np.sqrt(var), 1.0)
    z = (S - mu[:, None]) / sd[:, None] * m
    ones = (d * m).sum(axis=1)
    nondegen = (ones > 0) & (ones < cnt)
    B = S.shape[0]
    phi = np.zeros((B, 2))
    f = _objective_rows(phi, z, d, m, ridge)
    active = nondegen.copy()
    done = np.zeros(B, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        zi, di, mi, ph = z[idx], d[idx], m[idx], phi[idx]
        p = expit(ph[:, :1] + ph[:, 1:] * zi)
        r = (p - di) * mi
        g = np.column_stack([r.sum(1), (r * zi).sum(1)]) + 2 * ridge * ph
        w = p * (1 - p) * mi
        h00 = w.sum(1) + 2 * ridge
        h01 = (w * zi).sum(1)
        h11 = (w * zi * zi).sum(1) + 2 * ridge
        det = h00 * h11 - h01 * h01
        det = np.where(np.abs(det) > 1e-300, det, 1e-300)
        step = np.column_stack([(h11 * g[:, 0] - h01 * g[:, 1]) / det,
                                (h00 * g[:, 1] - h01 * g[:, 0]) / det])
        conv = (np.linalg.norm(g, axis=1) <= tol) & (
            np.linalg.norm(step, axis=1) <= np.sqrt(tol) * (1 + np.linalg.norm(ph, axis=1)))
        done[idx[conv]] = True
        active[idx[conv]] = False
        keep = ~conv
        idx, ph, step, g = idx[keep], ph[keep], step[keep], g[keep]
        if idx.size == 0:
            break
        t = np.ones(idx.size)
        f0 = f[idx]
        dec = (g * step).sum(1)
        pending = np.ones(idx.size, dtype=bool)
        cand = ph.copy()
        fc = f0.copy()
        for _ls in range(40):
            trial = ph - t[:, None] * step
            sub_f = _objective_rows(trial, z[idx], d[idx], m[idx], ridge)
            ok = (sub_f <= f0 - 1e-4 * t * dec + 1e-12 * (1 + np.abs(f0))) | (t < 1e-10)
            newly = pending & ok
            cand[newly] = trial[newly]
            fc[newly] = sub_f[newly]
            pending &= ~ok
            if not pending.any():
                break
            t = np.where(pending, t * 0.5, t)
        phi[idx] = cand
        f[idx] = fc
    theta0, theta1 = _to_raw(phi, mu, sd)
    ok = done & nondegen
    return np.where(ok, theta0, np.nan), np.where(ok, theta1, np.nan), ok


def _objective_rows(ph, z, d, m, ridge):
    eta = ph[:, :1] + ph[:, 1:] * z
    ll = (log_expit(eta) - (1 - d) * eta) * m  # log(1 - expit(x)) = log_expit(x) - x
    return -ll.sum(axis=1) + ridge * (ph * ph).sum(axis=1)


def busy_probability(p_md, p_fa, prior_h0):
    """Marginal probability that the power statistic exceeds the threshold."""
    return 1.0 - p_md + prior_h0 * (p_fa + p_md - 1.0)


def decision_region(theta: LogisticParams, p: float) -> DecisionRegion:
    """Lower bound of the power region where the model's busy probability is at least ``p``."""
    if not theta.theta1 > 0:
        raise FlatPredictor("slope must be positive")
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    return DecisionRegion(float((logit(p) - theta.theta0) / theta.theta1))


def binarize(S, region: DecisionRegion):
    """1 where ``S`` is inside the closed region ``[lower_bound, inf)``."""
    return (np.asarray(S) >= region.lower_bound).astype(np.int8)


def empirical_rates(region: DecisionRegion, S, d) -> tuple[float, float]:
    """(P_FA, P_MD) of ``region`` on labelled test samples."""
    S = np.asarray(S, dtype=float)
    d = np.asarray(d).astype(bool)
    if d.all() or not d.any():
        raise DegenerateLabels("test set needs both labels")
    pred = binarize(S, region).astype(bool)
    return float(np.mean(pred[~d])), float(np.mean(~pred[d]))
