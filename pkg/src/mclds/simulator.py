"""Tick-level network simulator.

Time is split into frames; ``qp_period_frames`` frames form one tick, and
each tick opens an intra-frame quiet period (QP) at its first frame, shared
by every cell.  All (cell, sensor, channel) powers are drawn every tick so
the random streams do not depend on which rule drives channel management.

A (cell, channel) whose driving-rule window breaks a detection limit gets an
inter-frame QP over the whole next superframe: its samples accumulate over
every frame and it is decided once, at the superframe's last tick.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import stats
from scipy.special import logit

from . import chanmgmt as cm
from .classifier import busy_probability, fit_mle_batch
from .config import RULES, ScenarioConfig, check
from .fusion import FusionBank, adapt, baseline_batch
from .incumbent import channel_onehot, coverage, frame_activity, keepout_channels
from .metrics import WindowBank, network_scalars, perf_from_counts, rates_from_counts
from .radio import (FadingProcess, incumbent_power, received_power, report_delivered,
                    threshold_snr)
from .streams import substream
from .topology import assign_sensors, build_topology

TRACE_COLUMNS = ("t", "cell", "channel", "rule", "D", "Z", "R", "statistic")


@dataclass
class SimulationResult:
    config: ScenarioConfig
    rules: tuple[str, ...]
    snapshot_superframes: np.ndarray  # (n_snap,)
    snapshots: np.ndarray  # (n_snap, rules, J, K, 5); NaN where undefined or NA
    network: np.ndarray  # (n_snap, rules, 5)
    ever_operating: np.ndarray  # (J, K) bool; False entries are reported as NA
    final_perf: np.ndarray  # (rules, J, K, 5)
    summary: np.ndarray  # (rules, 5), mean of post-burn-in snapshots
    final_lists: list[cm.ChannelLists]
    transitions: list[cm.Transition]
    switch_events: list[cm.SwitchEvent]
    violations: list[tuple[int, str]]  # (superframe, message) at management-cycle end
    trace: dict[str, np.ndarray] | None
    fit_counts: np.ndarray  # (J, S, K) fits per sensor model
    fit_bound: int
    escalations: int
    probes: dict[tuple[int, int], dict[str, np.ndarray]] = field(default_factory=dict)
    counters: dict[str, Any] = field(default_factory=dict)

    def rule_index(self, rule: str) -> int:
        return self.rules.index(rule)


class Simulator:
    """One run of a validated scenario; call :meth:`run` once."""

    def __init__(self, config: ScenarioConfig, record_trace: bool = True):
        self.cfg = check(config)
        self.record_trace = record_trace
        cfg = self.cfg
        self.J, self.K = cfg.num_cells, cfg.num_channels
        self.topo = build_topology(cfg)
        self.pos = self.topo.sensor_positions()
        self.S = self.pos.shape[1]
        centers = np.array([c.center for c in self.topo.cells])
        self.cov = coverage(self.topo.incumbents, centers, cfg.cell_radius, self.pos)
        self.onehot = channel_onehot(self.cov, self.K)
        ck = cfg.clock
        self.fps = ck.frames_per_superframe
        self.qpp = ck.qp_period_frames
        self.tps = self.fps // self.qpp
        self.n_frames = cfg.horizon * self.fps
        self.tick_len = self.qpp * ck.frame_len
        self._activity()
        radio = cfg.radio
        self.fading = FadingProcess(self.cov.distance, self.pos, radio,
                                    substream(cfg.seed, "fading"), substream(cfg.seed, "reporting"))
        self.is_power = incumbent_power(radio, self.cov.tx_power)
        self.M = radio.samples_per_sensing
        self.noise = radio.noise_power
        self.lam = self.noise * threshold_snr(radio)
        if radio.snr_min is None:
            self.lam_esc = self.noise * stats.gamma.isf(radio.pfa_target, self.fps * self.M) / self.fps
        else:
            self.lam_esc = self.lam
        self.rng_sense = substream(cfg.seed, "sensing")
        self.rng_db = substream(cfg.seed, "database")
        self.rng_esc = substream(cfg.seed, "escalation")
        self.byz = [(c - 1, s) for c, s in cfg.faults.byzantine]  # cpe slot s == sensor index s

    def _activity(self) -> None:
        cfg = self.cfg
        rng = substream(cfg.seed, "activity")
        on = cfg.per_channel(cfg.activity.mean_on)
        off = cfg.per_channel(cfg.activity.mean_off)
        burst = cfg.per_channel(cfg.activity.burstiness)
        rows = [frame_activity(on[k - 1], off[k - 1], burst[k - 1], self.n_frames,
                               cfg.clock.frame_len, rng) for k in self.cov.channel]
        self.is_on = np.array(rows, dtype=bool).reshape(len(rows), self.n_frames)
        self._cover_f = self.cov.covers_cell.astype(float)
        self._onehot_f = self.onehot.astype(float)

    def truth_frames(self, f0: int, f1: int) -> np.ndarray:
        """(f1 - f0, J, K) factual status per frame."""
        on = self.is_on[:, f0:f1].astype(float)
        return (np.einsum("nf,nj,nk->fjk", on, self._cover_f, self._onehot_f) > 0).astype(np.int8)

    # -- sensing duties -----------------------------------------------------

    def _masks(self) -> None:
        J, S, K = self.J, self.S, self.K
        assign = assign_sensors(self.topo, self.lists, self.cfg.channels.obs_fraction)
        active = np.zeros((J, S, K), dtype=bool)
        for (j, k), sensors in assign.sensors.items():
            active[j, list(sensors), k - 1] = True
        self.active = active
        self.tracked = active[:, 0, :].copy()
        ocl = np.zeros((J, K), dtype=bool)
        for j, cl in enumerate(self.lists):
            for k in cl.ocl:
                ocl[j, k - 1] = True
        self.ocl = ocl
        self.ever_ocl |= ocl
        self.inband = active & ocl[:, None, :]

    # -- classifier state ---------------------------------------------------

    def _init_classifier(self) -> None:
        c = self.cfg.classifier
        shape = (self.J, self.S, self.K)
        W = c.train_window
        self.tr_S = np.zeros(shape + (W,))
        self.tr_d = np.zeros(shape + (W,), dtype=np.int8)
        self.te_S = np.zeros(shape + (W,))
        self.te_d = np.zeros(shape + (W,), dtype=np.int8)
        self.tr_n = np.zeros(shape, dtype=np.int64)
        self.te_n = np.zeros(shape, dtype=np.int64)
        self.parity = np.zeros(shape, dtype=np.int64)
        self.theta0 = np.full(shape, np.nan)
        self.theta1 = np.full(shape, np.nan)
        self.err_at_fit = np.full(shape, np.nan)
        self.bound = np.full(shape, np.nan)  # NaN -> raw threshold
        self.fit_counts = np.zeros(shape, dtype=np.int64)

    def _store_samples(self, stat: np.ndarray, label: np.ndarray, upd: np.ndarray) -> None:
        W = self.cfg.classifier.train_window
        j, s, k = np.nonzero(upd)
        if j.size == 0:
            return
        to_train = self.parity[j, s, k] % 2 == 0
        for buf_S, buf_d, cnt, sel in ((self.tr_S, self.tr_d, self.tr_n, to_train),
                                       (self.te_S, self.te_d, self.te_n, ~to_train)):
            jj, ss, kk = j[sel], s[sel], k[sel]
            p = cnt[jj, ss, kk] % W
            buf_S[jj, ss, kk, p] = stat[jj, ss, kk]
            buf_d[jj, ss, kk, p] = label[jj, ss, kk]
            cnt[jj, ss, kk] += 1
        self.parity[j, s, k] += 1

    def _refit(self, rows: np.ndarray) -> None:
        """Refit the logistic model for every flagged (cell, sensor, channel)."""
        c = self.cfg.classifier
        W = c.train_window
        rows = rows & (np.minimum(self.tr_n, W) >= c.min_samples)
        j, s, k = np.nonzero(rows)
        if j.size == 0:
            return
        n = np.minimum(self.tr_n[j, s, k], W)
        mask = np.arange(W)[None, :] < n[:, None]
        t0, t1, ok = fit_mle_batch(self.tr_S[j, s, k], self.tr_d[j, s, k], mask,
                                   ridge=c.ridge, tol=c.tol, max_iter=c.max_iter)
        self.fit_counts[j, s, k] += 1
        self.theta0[j, s, k] = np.where(ok, t0, np.nan)
        self.theta1[j, s, k] = np.where(ok, t1, np.nan)
        self._update_regions()
        self.err_at_fit[j, s, k] = self._test_error()[j, s, k]

    def _test_error(self) -> np.ndarray:
        W = self.cfg.classifier.train_window
        n = np.minimum(self.te_n, W)
        valid = np.arange(W) < n[..., None]
        thr = np.where(np.isnan(self.bound), self.lam, self.bound)
        pred = self.te_S >= thr[..., None]
        wrong = (pred != self.te_d.astype(bool)) & valid
        with np.errstate(invalid="ignore", divide="ignore"):
            return wrong.sum(-1) / n

    def _update_regions(self) -> None:
        """Decision-region lower bounds from the fitted models and test-set rates at lambda."""
        c = self.cfg.classifier
        W = c.train_window
        n = np.minimum(self.te_n, W)
        valid = np.arange(W) < n[..., None]
        lab = self.te_d.astype(bool)
        above = self.te_S >= self.lam
        n1 = (lab & valid).sum(-1)
        n0 = (~lab & valid).sum(-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            p_fa = (above & ~lab & valid).sum(-1) / n0
            p_md = (~above & lab & valid).sum(-1) / n1
            if c.prior_h0 is not None:
                prior = np.full((self.J, self.K), c.prior_h0)
            else:
                prior = 1.0 - self.windows.busy_fraction_r()
            p = busy_probability(p_md, p_fa, prior[:, None, :])
            lb = (logit(p) - self.theta0) / self.theta1
        ok = (n0 > 0) & (n1 > 0) & (self.theta1 > 0) & (p > 0) & (p < 1) & np.isfinite(lb) & (lb > 0)
        # keep a learned region only where it matches held-out labels at least as well as lambda
        with np.errstate(invalid="ignore"):
            wrong_lr = ((self.te_S >= np.where(ok, lb, 0.0)[..., None]) != lab) & valid
            wrong_raw = (above != lab) & valid
        ok &= wrong_lr.sum(-1) <= wrong_raw.sum(-1)
        self.bound = np.where(ok, lb, np.nan)

    # -- channel management -------------------------------------------------

    def _record(self, now: float, j: int, before: cm.ChannelLists, after: cm.ChannelLists,
                promo: dict[int, tuple[float, float]] | None = None) -> None:
        for ch, a, b in cm.transitions_between(before, after):
            idle, gap = (promo or {}).get(ch, (float("nan"), float("nan")))
            self.transitions.append(cm.Transition(now, j, ch, a, b, idle, gap))

    def _busy_verdicts(self, busy: np.ndarray, now: float) -> bool:
        changed = False
        for j, k in zip(*np.nonzero(busy & self.ocl)):
            ch = int(k) + 1
            before = self.lists[j]
            if ch not in before.ocl:
                continue
            after, ev = cm.on_busy_verdict(before, ch, self.K, cell=int(j), now=now,
                                           moving_time=self.cfg.channels.moving_time)
            for c in set(before.bcl) | set(before.ccl):
                if after.where(c) == "pcl":
                    self.timers[j].pop(c, None)
            self.lists[j] = after
            self._record(now, int(j), before, after)
            if ev is not None:
                self.switch_events.append(ev)
            else:
                self.outages += 1
            changed = True
        return changed

    def _management_cycle(self, busy_seen: np.ndarray, now: float) -> None:
        chc = self.cfg.channels
        nbrs = self.topo.neighbors
        snapshot = list(self.lists)
        for j in range(self.J):
            nb_ocl = set().union(*[set(snapshot[l].ocl) for l in nbrs[j]]) if nbrs[j] else set()
            lists, timers = self.lists[j], self.timers[j]
            before = lists
            promo = {}
            for ch in lists.tracked():
                where = lists.where(ch)
                idle = not busy_seen[j, ch - 1]
                if where == "bcl" and idle:
                    continue
                if where == "pcl" and not idle:
                    continue
                if where == "ccl" and idle:
                    t = timers.get(ch)
                    gap = now - t.last_sensed if t else 0.0
                    run_gap = self.max_gap[j].get(ch, 0.0)
                    restart = t is None or gap > chc.max_sensing_gap
                    self.max_gap[j][ch] = 0.0 if restart else max(run_gap, gap)
                    idle_since = now if restart else t.idle_since
                    new_lists, timers = cm.obs_update(
                        lists, timers, ch, True, now, promotion_idle=chc.promotion_idle,
                        max_sensing_gap=chc.max_sensing_gap, blocked=ch in nb_ocl)
                    if new_lists.where(ch) == "bcl":
                        promo[ch] = (now - idle_since, self.max_gap[j].pop(ch, 0.0))
                    lists = new_lists
                    continue
                lists, timers = cm.obs_update(lists, timers, ch, idle, now,
                                              promotion_idle=chc.promotion_idle,
                                              max_sensing_gap=chc.max_sensing_gap)
                if where == "pcl":
                    self.max_gap[j][ch] = 0.0
            self.lists[j], self.timers[j] = lists, timers
            self._record(now, j, before, lists, promo)
        for j in range(self.J):
            before = lists = self.lists[j]
            for l in sorted(nbrs[j]):
                if l < j:
                    for ch in sorted(set(lists.ocl) & set(self.lists[l].ocl)):
                        lists = cm.move(lists, ch, "ocl", "pcl")
            nb_ocl = set().union(*[set(self.lists[l].ocl) for l in nbrs[j]]) if nbrs[j] else set()
            for ch in [c for c in lists.bcl if c in nb_ocl]:
                lists = cm.move(lists, ch, "bcl", "pcl")
            while len(lists.ocl) < chc.operating_channels and lists.bcl:
                nb_lists = [self.lists[l] for l in nbrs[j]]
                lps1, lps2, _, _ = cm.compute_lps(lists, nb_lists)
                pick = next((c for c in lists.bcl if c in lps1),
                            next((c for c in lists.bcl if c in lps2), lists.bcl[0]))
                lists = cm.move(lists, pick, "bcl", "ocl")
            self.lists[j] = lists
            self._record(now, j, before, lists)
        for j in range(self.J):
            nb_ocl = set().union(*[set(self.lists[l].ocl) for l in nbrs[j]]) if nbrs[j] else set()
            before = lists = self.lists[j]
            for ch in [c for c in lists.bcl if c in nb_ocl]:
                lists = cm.move(lists, ch, "bcl", "pcl")
            self.lists[j] = lists
            self._record(now, j, before, lists)

    # -- main loop ----------------------------------------------------------

    def run(self) -> SimulationResult:
        cfg = self.cfg
        J, S, K = self.J, self.S, self.K
        fc, mc, cc = cfg.fusion, cfg.metrics, cfg.classifier
        n_rules = len(RULES)
        drive = RULES.index(fc.driving_rule)
        disallowed = [keepout_channels(self.cov, j) for j in range(J)]
        self.lists = cm.initial_lists(J, K, self.topo.neighbors, disallowed,
                                      cfg.channels.operating_channels, cfg.channels.backup_size)
        self.timers = [{c: cm.PromotionTimer(c, 0.0, 0.0) for c in cl.ccl} for cl in self.lists]
        self.max_gap = [dict() for _ in range(J)]
        self.ever_ocl = np.zeros((J, K), dtype=bool)
        self.transitions: list[cm.Transition] = []
        self.switch_events: list[cm.SwitchEvent] = []
        self.outages = 0
        violations: list[tuple[int, str]] = []
        self._masks()
        self._init_classifier()
        self.windows = WindowBank(n_rules, J, K, mc.window)
        gamma = cfg.per_channel(fc.gamma)
        zeta = cfg.per_channel(fc.zeta)
        start = adapt(0.0, 0.0, fc.adapt_a, fc.adapt_b, fc.adapt_c, fc.adapt_d)
        max_n = max(fc.historic_count, int(np.floor(fc.adapt_b)))
        static = FusionBank((J, S, K), max_n, gamma, zeta, fc.alpha, fc.historic_count)
        adaptive = FusionBank((J, S, K), max_n, gamma, zeta, start.alpha, start.historic_count)
        lag = int(round(cfg.database.staleness / self.tick_len))
        z_hist: list[np.ndarray] = []
        esc = np.zeros((J, K), dtype=bool)
        acc = np.zeros((J, S, K))
        escalations = 0
        snaps, snap_sf, nets = [], [], []
        trace_parts: list[np.ndarray] = []
        probes = {(j, s): {"tick": [], "channel": [], "w": [], "d": []} for j, s in self.byz}
        byz_j = np.array([j for j, _ in self.byz], dtype=int)
        byz_s = np.array([s for _, s in self.byz], dtype=int)
        n_ticks = cfg.horizon * self.tps
        refit_every = cc.refit_every

        for sf in range(cfg.horizon):
            f0 = sf * self.fps
            z_frames = self.truth_frames(f0, f0 + self.fps)
            z_sf = z_frames.max(axis=0)
            busy_seen = np.zeros((J, K), dtype=bool)
            acc[:] = 0.0
            for ti in range(self.tps):
                t = sf * self.tps + ti
                f = f0 + ti * self.qpp
                now = f * cfg.clock.frame_len
                last = ti == self.tps - 1
                gain = self.fading.gains(f)
                audible = self.cov.audible & self.is_on[:, f][:, None, None]
                prx = received_power(gain.beta_sen, audible, self.is_power, self.onehot)
                stat = (self.noise + prx) * self.rng_sense.standard_gamma(self.M, (J, S, K))
                z_now = z_frames[ti * self.qpp]
                if esc.any():
                    e3 = np.broadcast_to(esc[:, None, :], (J, S, K))
                    extra = self.rng_esc.standard_gamma((self.qpp - 1) * self.M, int(e3.sum())) \
                        if self.qpp > 1 else 0.0
                    acc[e3] += stat[e3] + (self.noise + prx[e3]) * extra
                esc_now = esc & last
                qp = self.tracked & (~esc | last)
                stat_used = np.where(esc_now[:, None, :], acc / self.fps, stat)
                z_qp = np.where(esc_now, z_sf, z_now).astype(np.int8)
                z_hist.append(z_qp)
                if len(z_hist) > lag + 1:
                    z_hist.pop(0)
                # oldest kept entry is `lag` QPs back (or the first QP early in the run)
                flip = self.rng_db.random((J, K)) < cfg.database.error_prob
                R = (z_hist[0] ^ flip).astype(np.int8)

                lam = np.where(esc_now, self.lam_esc, self.lam)[:, None, :]
                d_raw = (stat_used >= lam).astype(np.int8)
                thr = np.where(np.isnan(self.bound), lam, self.bound)
                d_lr = (stat_used >= thr).astype(np.int8)
                if self.byz:
                    liar = 1 - z_qp[byz_j]
                    d_raw[byz_j, byz_s] = liar
                    d_lr[byz_j, byz_s] = liar

                beta = gain.beta_rep
                delivered = report_delivered(beta, cfg.radio)
                delivered[:, 0] = True
                if fc.rep_gain_norm == "cell_mean":
                    weight_js = beta / beta[:, 1:].mean(axis=1, keepdims=True)
                    weight_js[:, 0] = 1.0
                elif fc.rep_gain_norm == "capped":
                    # median CPE link gets weight 1, like the BS; stronger links saturate there
                    weight_js = np.minimum(beta / np.median(beta[:, 1:], axis=1, keepdims=True), 1.0)
                    weight_js[:, 0] = 1.0
                else:
                    weight_js = beta.copy()
                weight_js = weight_js * delivered
                act = self.active & qp[:, None, :]
                weight = weight_js[:, :, None] * act

                D_s, w_s, _ = static.step(d_lr, R, weight, act, qp)
                D_a, _, _ = adaptive.step(d_lr, R, weight, act, qp)
                include = act & delivered[:, :, None]
                D_all = np.stack([D_s, D_a] + [baseline_batch(r, d_raw, include, fc.vote_quorum)
                                               for r in ("AND", "OR", "VOTING")])
                self.windows.push(D_all, z_qp, R, qp)

                if self.byz:
                    for (j, s) in self.byz:
                        ks = np.flatnonzero(self.inband[j, s] & qp[j])
                        for k in ks:
                            pr = probes[(j, s)]
                            pr["tick"].append(t)
                            pr["channel"].append(k + 1)
                            pr["w"].append(w_s[j, s, k])
                            pr["d"].append(d_lr[j, s, k])

                # adaptive feedback from the adaptive rule's own window
                cnt = self.windows.dz_counts(mc.feedback_reference)[1]
                p_fa, p_md, _ = rates_from_counts(cnt, mc.literal_eq13)
                upd = qp & (self.windows.fill > 0)
                if upd.any():
                    al, nn = adapt(np.nan_to_num(p_md), np.nan_to_num(p_fa),
                                   fc.adapt_a, fc.adapt_b, fc.adapt_c, fc.adapt_d)
                    adaptive.alpha = np.where(upd, al, adaptive.alpha)
                    adaptive.N = np.where(upd, nn, adaptive.N)

                label = R if cc.labels == "database" else z_qp
                self._store_samples(stat_used, np.broadcast_to(label[:, None, :], (J, S, K)), act)
                if (t + 1) % refit_every == 0:
                    self._refit(np.ones((J, S, K), dtype=bool))

                D_drive = D_all[drive]
                busy_seen |= qp & (D_drive == 1)
                if self.record_trace:
                    self._trace(trace_parts, t, D_all, z_qp, R, static, adaptive, d_raw, include,
                                qp & self.ocl)
                if cfg.channels.switching and self._busy_verdicts(qp & (D_drive == 1), now):
                    self._masks()

            # superframe end
            now = (f0 + self.fps) * cfg.clock.frame_len
            if cfg.channels.switching:
                self._management_cycle(busy_seen, now)
                self._masks()
            for msg in cm.validate_lists(self.lists, self.topo.neighbors):
                violations.append((sf, msg))
            # error-triggered refits, then fresh regions
            err = self._test_error()
            with np.errstate(invalid="ignore"):
                floor = 1.0 / cc.train_window
                trig = (~np.isnan(self.theta1)) & (err > cc.refit_error_factor
                                                   * np.maximum(self.err_at_fit, floor))
            if trig.any():
                self._refit(trig)
            self._update_regions()
            # escalation for the next superframe
            esc = np.zeros((J, K), dtype=bool)
            if cfg.clock.escalation:
                cnt = self.windows.dz_counts("truth")[drive]
                p_fa, p_md, _ = rates_from_counts(cnt, mc.literal_eq13)
                flag = self.ocl & (self.windows.fill > 0) & (
                    (np.nan_to_num(p_md) > mc.limit_md) | (np.nan_to_num(p_fa) > mc.limit_fa))
                esc = flag.copy()
                for j, k in zip(*np.nonzero(flag)):
                    for l in self.topo.neighbors[j]:
                        if self.ocl[l, k]:
                            esc[l, k] = True
                escalations += int(esc.sum())
            if (sf + 1) % mc.snapshot_every == 0:
                perf = self._perf()
                snaps.append(perf)
                snap_sf.append(sf + 1)
                nets.append(network_scalars(perf, self._weights()))
        return self._result(snaps, snap_sf, nets, trace_parts, violations, escalations, probes,
                            n_ticks)

    def _weights(self) -> np.ndarray:
        return np.where(self.ever_ocl, self.windows.fill, 0).astype(float)

    def _perf(self) -> np.ndarray:
        mc = self.cfg.metrics
        perf = perf_from_counts(self.windows.dz_counts("truth"), mc.literal_eq13, mc.chi2_mode)
        perf[:, ~self.ever_ocl] = np.nan
        return perf

    def _trace(self, parts, t, D_all, z, R, static, adaptive, d_raw, include, mask) -> None:
        j, k = np.nonzero(mask)
        if j.size == 0:
            return
        ones = (d_raw.astype(bool) & include).sum(axis=1)
        stat = np.stack([static.last_total, adaptive.last_total, ones, ones, ones])
        n_rules = D_all.shape[0]
        rows = np.empty((n_rules * j.size, 8))
        for r in range(n_rules):
            sl = slice(r * j.size, (r + 1) * j.size)
            rows[sl] = np.column_stack([np.full(j.size, t), j + 1, k + 1, np.full(j.size, r),
                                        D_all[r, j, k], z[j, k], R[j, k], stat[r, j, k]])
        parts.append(rows)

    def _result(self, snaps, snap_sf, nets, trace_parts, violations, escalations, probes,
                n_ticks) -> SimulationResult:
        cfg = self.cfg
        J, K, S = self.J, self.K, self.S
        n_rules = len(RULES)
        snapshots = np.array(snaps) if snaps else np.zeros((0, n_rules, J, K, 5))
        network = np.array(nets) if nets else np.zeros((0, n_rules, 5))
        snap_sf = np.array(snap_sf, dtype=int)
        keep = snap_sf > cfg.metrics.burn_in
        summary = np.full((n_rules, 5), np.nan)
        if keep.any():
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN columns stay NaN
                summary = np.nanmean(network[keep], axis=0)
        final_perf = self._perf() if cfg.horizon > 0 else np.full((n_rules, J, K, 5), np.nan)
        trace = None
        if self.record_trace:
            rows = np.concatenate(trace_parts) if trace_parts else np.zeros((0, 8))
            trace = {name: rows[:, i] for i, name in enumerate(TRACE_COLUMNS)}
        out_probes = {key: {k: np.array(v) for k, v in pr.items()} for key, pr in probes.items()}
        bound = n_ticks // self.cfg.classifier.refit_every + cfg.horizon
        return SimulationResult(
            config=cfg, rules=RULES, snapshot_superframes=snap_sf, snapshots=snapshots,
            network=network, ever_operating=self.ever_ocl.copy(), final_perf=final_perf,
            summary=summary, final_lists=list(self.lists), transitions=self.transitions,
            switch_events=self.switch_events, violations=violations, trace=trace,
            fit_counts=self.fit_counts, fit_bound=bound, escalations=escalations,
            probes=out_probes, counters={"outages": self.outages, "sensors": S})


def run_simulation(config: ScenarioConfig, record_trace: bool = True) -> SimulationResult:
    """Run ``config.horizon`` superframes and collect per-rule performance."""
    return Simulator(config, record_trace=record_trace).run()
