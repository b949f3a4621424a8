import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from msmwc.numerics import (
    ConfigurationError,
    ConvexDomain,
    DomainError,
    entropic_kkt_residual,
    entropic_omd_solve,
    entropic_omd_solve_full,
    euclidean_omd_step,
    kl_divergence,
    matrix_omd_step,
    matrix_omd_step_many,
    omd_one_step_inequality,
    weighted_entropy_bregman,
)


def brute_force_simplex(cost, prior, rates, step=1e-3):
    """Grid search of <c, w> + D_psi(w, prior) over the 2- or 3-simplex."""
    n = len(cost)
    ticks = np.arange(0.0, 1.0 + step / 2, step)
    best, arg = math.inf, None
    if n == 2:
        cands = ((a, 1 - a) for a in ticks)
    else:
        cands = ((a, b, 1 - a - b) for a in ticks for b in ticks if a + b <= 1 + 1e-12)
    for w in cands:
        w = np.clip(np.array(w), 0, None)
        val = float(cost @ w)
        for j in range(n):
            if w[j] > 0:
                val += (w[j] * math.log(w[j] / prior[j]) - w[j] + prior[j]) / rates[j]
            else:
                val += prior[j] / rates[j]
        if val < best:
            best, arg = val, w
    return arg


# -- kl and bregman


def test_kl_examples():
    assert kl_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-12)
    assert kl_divergence([0.25, 0.75], [0.5, 0.5]) == pytest.approx(0.130812, abs=1e-6)


def test_kl_support_violation():
    with pytest.raises(DomainError):
        kl_divergence([0.5, 0.5], [1.0, 0.0])


def test_bregman_examples():
    w, wr = np.array([0.2, 0.8]), np.array([0.6, 0.4])
    assert weighted_entropy_bregman(w, wr, np.full(2, 0.5)) == pytest.approx(kl_divergence(w, wr) / 0.5)
    assert weighted_entropy_bregman(w, w, np.array([1.0, 3.0])) == 0.0
    # psi(w) = sum w log w / eta, so D = sum (w log(w/w') - w + w') / eta = (log 2 - 1/2) + 1/4
    assert weighted_entropy_bregman([1, 0], [0.5, 0.5], np.array([1.0, 2.0])) == pytest.approx(0.443147, abs=1e-6)


def _psi(w, eta):
    w = np.asarray(w, dtype=float)
    return float(np.sum(np.where(w > 0, w * np.log(np.where(w > 0, w, 1.0)), 0.0) / eta))


@given(st.integers(0, 10**6), st.integers(2, 6))
def test_bregman_matches_definition(seed, n):
    # D(u, w) = psi(u) - psi(w) - <grad psi(w), u - w>, grad psi(w) = (log w + 1) / eta
    rng = np.random.default_rng(seed)
    u, w = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
    eta = np.exp(rng.uniform(-3, 3, n))
    ref = _psi(u, eta) - _psi(w, eta) - float(np.sum((np.log(w) + 1) / eta * (u - w)))
    assert weighted_entropy_bregman(u, w, eta) == pytest.approx(ref, rel=1e-9, abs=1e-9)


@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6), st.integers(0, 10_000))
def test_bregman_nonnegative(raw, seed):
    rng = np.random.default_rng(seed)
    w = np.array(raw) / sum(raw)
    wr = rng.dirichlet(np.ones(len(raw)))
    rates = rng.uniform(0.01, 10, len(raw))
    assert weighted_entropy_bregman(w, wr, rates) >= -1e-12


# -- entropic solve


def test_entropic_trivial_examples():
    prior = np.array([0.2, 0.3, 0.5])
    assert np.allclose(entropic_omd_solve(np.zeros(3), prior, np.ones(3)), prior, atol=1e-12)
    w = entropic_omd_solve(np.array([5.0, -3.0, 1.0]), prior, np.ones(3), np.array([False, True, False]))
    assert np.array_equal(w, [0.0, 1.0, 0.0])


def test_entropic_uniform_rate_closed_form():
    rng = np.random.default_rng(1)
    for _ in range(20):
        prior = rng.dirichlet(np.ones(5))
        cost = rng.normal(size=5)
        eta = rng.uniform(0.1, 3)
        w = entropic_omd_solve(cost, prior, np.full(5, eta))
        ref = prior * np.exp(-eta * cost)
        assert np.allclose(w, ref / ref.sum(), atol=1e-12)


def test_entropic_matches_grid_search():
    rng = np.random.default_rng(7)
    for n in (2, 3):
        for _ in range(5):
            prior = rng.dirichlet(np.ones(n))
            cost = rng.normal(size=n)
            rates = rng.uniform(0.2, 4, n)
            w = entropic_omd_solve(cost, prior, rates)
            ref = brute_force_simplex(cost, prior, rates, step=1e-2 if n == 3 else 1e-3)
            assert np.max(np.abs(w - ref)) <= (2e-2 if n == 3 else 5e-3)


def test_entropic_empty_active_set():
    with pytest.raises(ConfigurationError):
        entropic_omd_solve(np.zeros(2), np.array([0.5, 0.5]), np.ones(2), np.array([False, False]))


def test_entropic_underflow_keeps_log_weights():
    # rates spanning 2^-10..2^10 with a large cost push some weights to exactly 0
    rates = np.ldexp(1.0, np.arange(-10, 11)) / 32
    cost = np.full(21, 50.0)
    cost[0] = 0.0
    sol = entropic_omd_solve_full(cost, np.full(21, 1 / 21), rates)
    assert abs(sol.weights.sum() - 1) <= 1e-12
    assert np.all(np.isfinite(sol.log_weights))


@given(st.integers(0, 10**6), st.integers(2, 12))
def test_entropic_kkt_and_simplex(seed, n):
    rng = np.random.default_rng(seed)
    prior = rng.dirichlet(np.ones(n))
    cost = rng.normal(scale=rng.uniform(0.1, 50), size=n)
    rates = np.exp(rng.uniform(-6, 4, n))
    active = rng.random(n) < 0.8
    active[rng.integers(n)] = True
    sol = entropic_omd_solve_full(cost, prior, rates, active)
    w = sol.weights
    assert np.all(w >= 0)
    assert abs(w.sum() - 1) <= 1e-12
    assert np.all(w[~active] == 0)
    assert entropic_kkt_residual(w, cost, prior, rates, active, sol.log_weights) <= 1e-10


# -- euclidean / matrix steps


def test_euclidean_examples():
    ball = ConvexDomain.ball(np.zeros(2), 1.0)
    c = np.array([0.3, -0.2])
    assert np.allclose(euclidean_omd_step(np.zeros(2), c, 1.0, ball), c)
    assert np.allclose(euclidean_omd_step(np.array([-4.0, 0.0]), np.zeros(2), 1.0, ball), [1.0, 0.0])
    big = ConvexDomain.ball(np.zeros(2), 100.0)
    assert np.allclose(euclidean_omd_step(np.array([1.0, 0.0]), np.zeros(2), 1.0, big), [-0.5, 0.0])


def test_matrix_examples():
    ball = ConvexDomain.ball(np.zeros(2), 5.0)
    c = np.array([0.1, 0.2])
    assert np.allclose(matrix_omd_step(np.zeros(2), c, np.eye(2), ball), c)
    g = np.array([0.4, -0.3])
    assert np.allclose(matrix_omd_step(g, c, np.eye(2), ball), c - g)
    assert np.allclose(euclidean_omd_step(g, c, 2.0, ball), c - g)
    box = ConvexDomain.box([-10.0], [10.0])
    assert matrix_omd_step(np.array([2.0]), np.zeros(1), np.array([[4.0]]), box)[0] == pytest.approx(-0.5)


def test_matrix_box_requires_diagonal():
    box = ConvexDomain.box([-1.0, -1.0], [1.0, 1.0])
    with pytest.raises(ConfigurationError):
        matrix_omd_step(np.ones(2), np.zeros(2), np.array([[2.0, 0.5], [0.5, 2.0]]), box)


def _ball_metric_oracle(y, U, r):
    """Projection onto the ball in the U-norm by a dense angle scan (d = 2)."""
    best, arg = math.inf, None
    for th in np.linspace(0, 2 * math.pi, 200_001):
        x = r * np.array([math.cos(th), math.sin(th)])
        v = (x - y) @ U @ (x - y)
        if v < best:
            best, arg = v, x
    return arg


def test_matrix_ball_projection_against_scan():
    rng = np.random.default_rng(3)
    ball = ConvexDomain.ball(np.zeros(2), 1.0)
    for _ in range(3):
        A = rng.normal(size=(2, 2))
        U = A @ A.T + 0.5 * np.eye(2)
        g = rng.normal(size=2) * 5
        x = matrix_omd_step(g, np.zeros(2), U, ball)
        y = -np.linalg.solve(U, g)
        if np.linalg.norm(y) > 1:
            assert np.allclose(x, _ball_metric_oracle(y, U, 1.0), atol=1e-4)


@given(st.integers(0, 10**6))
def test_matrix_many_matches_scalar(seed):
    rng = np.random.default_rng(seed)
    d, n = 3, 5
    ball = ConvexDomain.ball(rng.normal(size=d) * 0.1, 1.0)
    A = rng.normal(size=(n, d, d))
    U = A @ np.transpose(A, (0, 2, 1)) + np.eye(d)
    G = rng.normal(size=(n, d)) * rng.uniform(0.1, 20)
    C = ball.project_many(rng.normal(size=(n, d)))
    out = matrix_omd_step_many(G, C, U, ball)
    for k in range(n):
        assert np.allclose(out[k], matrix_omd_step(G[k], C[k], U[k], ball), atol=1e-9)
        assert ball.contains(out[k], 1e-12)


# -- one-step inequality


def _omd_round(rng, n):
    prior = rng.dirichlet(np.ones(n))
    rates = np.exp(rng.uniform(-3, 0, n))
    m = rng.normal(size=n)
    loss = m + rng.normal(scale=0.3, size=n)
    w_t = entropic_omd_solve(m, prior, rates)
    w_next = entropic_omd_solve(loss, prior, rates)
    return loss, m, w_t, w_next, prior, rates


def test_one_step_examples():
    rng = np.random.default_rng(0)
    loss, m, w_t, w_next, prior, rates = _omd_round(rng, 4)
    ok, slack = omd_one_step_inequality(loss, m, w_t, w_next, prior, w_t, rates)
    assert ok and slack >= 0
    z = np.zeros(4)
    ok, slack = omd_one_step_inequality(z, z, prior, prior, prior, prior, rates)
    assert ok and slack == pytest.approx(0.0, abs=1e-15)


@given(st.integers(0, 10**6), st.integers(2, 8))
def test_one_step_holds_on_random_rounds(seed, n):
    rng = np.random.default_rng(seed)
    loss, m, w_t, w_next, prior, rates = _omd_round(rng, n)
    for u in itertools.chain(np.eye(n), [rng.dirichlet(np.ones(n))]):
        ok, slack = omd_one_step_inequality(loss, m, w_t, w_next, prior, u, rates)
        assert slack >= -1e-9
