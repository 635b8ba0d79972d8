import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mclds.fusion import (EmptyDecisions, FusionBank, adapt, baseline_batch, baseline_combine,
                          combine, confidence, indicator, score)

GAMMA, ZETA = 1.0, 2.0

# reward-penalty table, rows (d, D_prev, R) -> score in units of (gamma, zeta)
TABLE = {
    (0, 0, 0): GAMMA, (1, 0, 1): ZETA, (0, 1, 0): ZETA, (1, 1, 1): GAMMA,
    (1, 0, 0): -GAMMA, (0, 0, 1): -ZETA, (1, 1, 0): -ZETA, (0, 1, 1): -GAMMA,
}


def test_score_matches_table_exhaustively():
    for (d, D, R), expected in TABLE.items():
        assert score(d, D, R, GAMMA, ZETA) == expected


def test_score_examples():
    assert score(1, 0, 1, 0.3, 0.8) == pytest.approx(0.8)
    assert score(0, 0, 1, 0.3, 0.8) == pytest.approx(-0.8)
    assert score(0, 0, 0, 0.3, 0.8) == pytest.approx(0.3)


@given(g=st.floats(0.01, 10), extra=st.floats(0.01, 10))
def test_score_antisymmetric_in_local_decision(g, extra):
    for d, D, R in itertools.product((0, 1), repeat=3):
        assert score(d, D, R, g, g + extra) == -score(1 - d, D, R, g, g + extra)


def test_confidence_examples():
    assert confidence([], 0.7, 5) == 0.0
    # newest last: L(n-1) = zeta, L(n-2) = gamma
    assert confidence([GAMMA, ZETA], 0.5, 2) == pytest.approx(0.5 * ZETA + 0.25 * GAMMA)
    alpha = 0.6
    assert confidence([-GAMMA] * 400, alpha, 400) == pytest.approx(-GAMMA * alpha / (1 - alpha))
    # only the newest N scores count
    assert confidence([100.0, 1.0], 0.5, 1) == pytest.approx(0.5)


def test_indicator_examples():
    assert indicator(3.0, 1) == 3.0
    assert indicator(-3.0, 0) == 3.0
    assert indicator(0.0, 0) == 0.0 and indicator(0.0, 1) == 0.0


def test_combine_examples():
    assert combine(0.0, [(5.0, 1.0)]) == 1
    assert combine(1.0, [(-1.0, 1.0)]) == 0
    assert combine(2.0, [(-3.0, 0.5), (1.0, 1.0)]) == 1


def test_baseline_examples():
    assert [baseline_combine(r, [1, 1, 0], 2) for r in ("AND", "OR", "VOTING")] == [0, 1, 1]
    assert [baseline_combine(r, [0, 0, 0]) for r in ("AND", "OR", "VOTING")] == [0, 0, 0]
    with pytest.raises(EmptyDecisions):
        baseline_combine("OR", [])
    with pytest.raises(ValueError):
        baseline_combine("VOTING", [1, 0], quorum=3)


def test_baseline_ordering_exhaustive():
    for n in range(1, 12):
        vecs = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int8)
        inc = np.ones_like(vecs, dtype=bool)
        a, v, o = (baseline_batch(r, vecs, inc) for r in ("AND", "VOTING", "OR"))
        assert np.all(a <= v) and np.all(v <= o)
        # batch agrees with the scalar rule
        for i in range(0, len(vecs), max(1, len(vecs) // 50)):
            for r, got in (("AND", a), ("VOTING", v), ("OR", o)):
                assert baseline_combine(r, vecs[i]) == got[i]


def test_adapt_examples():
    tp = adapt(0.0, 0.0, 8, 12, 0.5, 0.4)
    assert (tp.historic_count, tp.alpha) == (12, 0.5)
    assert adapt(0.5, 0.0, 8, 12, 0.5, 0.4).historic_count == 8
    assert adapt(1.0, 1.0, 8, 12, 0.5, 0.4).historic_count == 4
    assert adapt(0.0, 1.0, 8, 12, 0.5, 0.4).alpha == pytest.approx(0.9)
    with pytest.raises(ValueError):
        adapt(0.0, 0.0, 3, 3.5, 0.5, 0.4)


@given(p_md=st.floats(0, 1), p_fa=st.floats(0, 1))
def test_adapt_ranges(p_md, p_fa):
    tp = adapt(p_md, p_fa, 8, 12, 0.5, 0.4)
    assert 4 <= tp.historic_count <= 12
    assert 0.5 <= tp.alpha <= 0.9 and 0 < tp.alpha < 1


@given(x_bs=st.floats(-10, 10), xs=st.lists(st.floats(-10, 10), min_size=1, max_size=8),
       betas=st.lists(st.floats(0.01, 5), min_size=8, max_size=8), pick=st.integers(0, 7),
       boost=st.floats(1.0, 50.0))
def test_raising_a_positive_contribution_never_clears_busy(x_bs, xs, betas, pick, boost):
    contrib = list(zip(xs, betas))
    i = pick % len(contrib)
    if combine(x_bs, contrib) == 1 and contrib[i][0] > 0:
        raised = list(contrib)
        raised[i] = (contrib[i][0], contrib[i][1] * boost)
        assert combine(x_bs, raised) == 1


def _run_bank(d_seq, R_seq, gamma, zeta, alpha=0.8, N=6, weight=None):
    T, S = d_seq.shape
    bank = FusionBank((1, S, 1), N, gamma, zeta, alpha, N)
    w = np.ones((1, S, 1)) if weight is None else weight
    out = []
    for t in range(T):
        D, conf, X = bank.step(d_seq[t][None, :, None], np.array([[R_seq[t]]]), w,
                               np.ones((1, S, 1), bool), np.ones((1, 1), bool))
        out.append((int(D[0, 0]), conf[0, :, 0].copy()))
    return out


@given(seed=st.integers(0, 10**6), scale=st.floats(0.1, 20))
def test_scaling_gamma_and_zeta_leaves_decisions_unchanged(seed, scale):
    rng = np.random.default_rng(seed)
    d = rng.integers(0, 2, (40, 5))
    R = rng.integers(0, 2, 40)
    a = [D for D, _ in _run_bank(d, R, 1.0, 2.0)]
    b = [D for D, _ in _run_bank(d, R, scale, 2.0 * scale)]
    assert a == b


@given(seed=st.integers(0, 10**6), alpha=st.floats(0.05, 0.95), N=st.integers(1, 10))
def test_bank_matches_scalar_definitions(seed, alpha, N):
    rng = np.random.default_rng(seed)
    T, S = 30, 4
    d = rng.integers(0, 2, (T, S))
    R = rng.integers(0, 2, T)
    beta = rng.uniform(0.1, 2.0, S)
    out = _run_bank(d, R, GAMMA, ZETA, alpha, N, weight=beta[None, :, None])
    hist = [[] for _ in range(S)]
    D_prev = int(R[0])
    for t in range(T):
        w = np.array([confidence(h, alpha, N) for h in hist])
        X = indicator(w, d[t])
        D = combine(X[0] * beta[0], [(X[i], beta[i]) for i in range(1, S)])
        assert out[t][0] == D
        assert np.allclose(out[t][1], w)
        for i in range(S):
            hist[i].append(float(score(d[t, i], D_prev, R[t], GAMMA, ZETA)))
        D_prev = D


def test_truthful_sensor_gains_trust_and_liar_loses_it():
    rng = np.random.default_rng(0)
    N = 8
    Z = rng.integers(0, 2, 60)
    d = np.column_stack([Z, Z, Z, 1 - Z])  # BS and two truthful CPEs, one liar
    out = _run_bank(d, Z, GAMMA, ZETA, alpha=0.7, N=N)
    for D, w in out[N:]:
        assert w[0] > 0 and w[3] < 0
    assert [D for D, _ in out[1:]] == Z[1:].tolist()
