import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from msmwc.environments import PeaStream
from msmwc.numerics import ConfigurationError
from msmwc.pea_adaptive import (
    DoublingRunner,
    RestartWrapper,
    check_theorem4_shape,
    doubling_run,
    drift_statistics,
    theorem4_ratio,
)
from msmwc.pea_core import ProtocolError


def play(wrapper, stream):
    for m, loss in stream:
        wrapper.predict(m)
        wrapper.update(loss)
    return wrapper.trace


def one_expert_round(m, loss, B_prev, B_next):
    """Drive a single-expert wrapper to B_prev, then feed (m, loss) with ||loss - m|| = B_next."""
    w = RestartWrapper(np.ones(1), 10**6, B0=B_prev)
    w.predict(np.array([m]))
    return w.update(np.array([loss]))


def test_clip_examples():
    assert one_expert_round(0.0, 10.0, 1.0, 10.0)["surrogate"][0] == pytest.approx(1.0)
    assert one_expert_round(2.0, 12.0, 1.0, 10.0)["surrogate"][0] == pytest.approx(3.0)


def test_unit_clip_ratio_keeps_loss():
    out = one_expert_round(0.5, 0.25, 1.0, 1.0)
    assert out["surrogate"][0] == 0.25


def test_single_expert_always_plays_it():
    w = RestartWrapper(np.ones(1), 8)
    for t in range(8):
        assert w.predict(np.array([t * 3.0]))[0] == 1.0
        w.update(np.array([-t]))


def test_first_round_feeds_B0():
    w = RestartWrapper(np.ones(3) / 3, 16, B0=2.5)
    w.predict(np.zeros(3))
    assert w.trace is not None
    w.update(np.full(3, 0.1))
    assert w.trace.B_fed[0] == 2.5 and w.trace.B[0] == 2.5


def test_protocol_errors():
    w = RestartWrapper(np.ones(2) / 2, 4)
    with pytest.raises(ProtocolError):
        w.update(np.zeros(2))
    w.predict(np.zeros(2))
    with pytest.raises(ProtocolError):
        w.predict(np.zeros(2))
    with pytest.raises(ConfigurationError):
        RestartWrapper(np.ones(2) / 2, 0)
    with pytest.raises(ConfigurationError):
        RestartWrapper(np.ones(2) / 2, 4, B0=0.0)


def test_restart_round_on_scale_shock():
    s = PeaStream("scale_shock", 4, 100, seed=3, shock_round=50, factor=1e3)
    w = RestartWrapper(np.ones(4) / 4, 100, B0=1.0)
    tr = play(w, s)
    B = np.maximum.accumulate(np.maximum(np.abs(s.losses - s.optimisms).max(axis=1), 1.0))
    first = int(np.argmax(B > 100)) + 1
    assert first == 50
    assert w.tracker.restart_rounds == [50] and tr.restart_rounds == [50]
    assert w.session is not None and w.session.B1 == pytest.approx(B[49])


def test_restart_gives_fresh_session():
    s = PeaStream("scale_shock", 3, 20, seed=0, shock_round=10, factor=1e3)
    w = RestartWrapper(np.ones(3) / 3, 20)
    for t, (m, loss) in enumerate(s, start=1):
        w.predict(m)
        w.update(loss)
        if t == 10:
            assert w.session is None
            fresh = w.prepare()
            assert fresh.t == 0 and fresh.T == 20
            assert np.array_equal(fresh.prior, w.prior)


def test_no_restart_without_growth():
    s = PeaStream("iid_gap", 3, 200, seed=2)
    w = RestartWrapper(np.ones(3) / 3, 200)
    play(w, s)
    assert w.tracker.restart_count == 0


@given(st.integers(0, 10**6), st.floats(1.0, 1e4))
def test_clip_contract_and_drift(seed, factor):
    s = PeaStream("scale_shock", 3, 40, seed=seed, shocks=[(7, factor), (25, 3.0)])
    tr = play(RestartWrapper(np.ones(3) / 3, 40, B0=0.5), s)
    st_ = drift_statistics(tr)
    assert st_["clip_excess"] <= 1e-12
    assert st_["drift"] <= 2 * st_["B_T"] + 1e-9
    assert np.all(np.diff(tr.B) >= 0) and tr.B[0] >= 0.5


def test_doubling_schedule_examples():
    prior = np.ones(2) / 2
    r = DoublingRunner(prior, M=1)
    for _ in range(5):
        r.predict(np.zeros(2))
        r.update(np.zeros(2))
    # rounds 1-2 on horizon 2, rounds 3-4 on horizon 4, round 5 on horizon 16
    assert r.trace.doubling_rounds == [2, 4]
    assert r.M == 4 and r.wrapper.T == 16


@pytest.mark.parametrize("M", [1, 2, 3, 5])
def test_doubling_boundary(M):
    s = PeaStream("iid_gap", 2, 2**M, seed=0)
    assert doubling_run(None, s, M=M).doubling_rounds == []
    s = PeaStream("iid_gap", 2, 2**M + 1, seed=0)
    assert doubling_run(None, s, M=M).doubling_rounds == [2**M]


@given(st.integers(1, 3000))
def test_doubling_restart_count(T):
    M, t, count = 1, 0, 0
    while t < T:
        t += 1
        if t > 2**M:
            M, count = 2 * M, count + 1
    assert count <= math.ceil(math.log2(math.log2(T))) + 1 if T > 2 else count <= 1


def test_doubling_carries_scale():
    s = PeaStream("scale_shock", 2, 10, seed=0, shock_round=2, factor=50.0)
    r = DoublingRunner(np.ones(2) / 2, M=1)
    for m, loss in s:
        r.predict(m)
        r.update(loss)
    assert r.wrapper.tracker.B0 >= 50.0


def test_doubling_run_empty_and_concatenated():
    assert doubling_run(None, PeaStream("iid_gap", 3, 0)).T == 0
    s = PeaStream("drifting_leader", 3, 37, seed=1)
    tr = doubling_run(None, s)
    assert tr.T == 37
    assert np.allclose(np.array(tr.decisions).sum(axis=1), 1.0)


def test_theorem4_ratio_matches_formula():
    s = PeaStream("optimism_quality", 4, 300, seed=5, noise=[0.05, 0.5, 0.5, 0.5])
    tr = doubling_run(None, s)
    L, M = s.losses, s.optimisms
    P = np.array(tr.decisions)
    u = np.eye(4)[0]
    R = float(np.sum((P - u) * L))
    V = float(np.sum((L[:, 0] - M[:, 0]) ** 2))
    c = math.log(4) + math.log(tr.grid_size)
    ref = R / (math.sqrt(c * V) + tr.B_T * c)
    assert theorem4_ratio(tr, u) == pytest.approx(ref, rel=1e-12)


def test_theorem4_shape_report():
    traces = [doubling_run(None, PeaStream("iid_gap", 3, T, seed=1)) for T in (64, 256, 1024)]
    rep = check_theorem4_shape(traces, factor=1e9)
    assert [T for T, _ in rep["rows"]] == [64, 256, 1024]
    assert rep["ok"] and rep["growth"] == pytest.approx(rep["max_rho"] / max(rep["rows"][0][1], 0.05))
    assert not check_theorem4_shape(traces, factor=1e-9)["ok"]


def test_theorem4_degenerate_denominator_skipped():
    from msmwc.pea_adaptive import PeaTrace

    tr = PeaTrace(np.ones(1), decisions=[np.ones(1)], losses=[np.zeros(1)], optimisms=[np.zeros(1)], B=[0.0])
    assert theorem4_ratio(tr, np.ones(1)) is None
    rep = check_theorem4_shape([tr])
    assert rep["ok"] and rep["rows"] == [] and rep["notes"]
