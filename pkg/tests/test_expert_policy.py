import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cocolearn import expert_policy as ep
from cocolearn import hedge
from cocolearn.core import lambda_expert


def reference_run(costs, violations, T, beta):
    """Straight-line reimplementation used as an oracle for the policy."""
    n = costs.shape[1]
    lam = lambda_expert(T, beta, n)
    L = np.zeros(n)
    algo = 0.0
    G = 1.0 + lam
    q = 0.0
    probs = []
    for f, g in zip(costs, violations):
        eta = math.sqrt(math.log(n) / (algo + 1.08 * G)) / math.sqrt(G)
        w = np.exp(-eta * (L - L.min()))
        p = w / w.sum()
        probs.append(p)
        q += g @ p
        phi = lam * math.exp(lam * q)
        fh = f + phi * g
        algo += fh @ p
        L += fh
        G = 1.0 + phi
    return np.array(probs), q


def test_initial_state():
    pol = ep.init(20, 5000, 0.75)
    lam = 5000**-0.25 / (20 * math.log(20))
    assert pol.lyapunov.lam == pytest.approx(lam, rel=1e-14)
    assert pol.hedge.scale == pytest.approx(1 + lam, rel=1e-14)
    assert pol.hedge.scale == pytest.approx(1.001986, abs=2e-6)
    assert pol.hedge.gamma == 1.08
    np.testing.assert_allclose(ep.act(pol), 1 / 20)
    assert ep.init(2, 1, 0.0).hedge.scale == pytest.approx(1.07214, abs=1e-5)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 8), st.integers(1, 60), st.floats(0, 1), st.integers(0, 10**6))
def test_policy_matches_reference(n, T, beta, seed):
    rng = np.random.default_rng(seed)
    costs = rng.random((T, n))
    viol = (rng.random((T, n)) < 0.5) * rng.random((T, n))
    ref_probs, ref_q = reference_run(costs, viol, T, beta)
    pol = ep.init(n, T, beta)
    for t in range(T):
        p = ep.act(pol)
        np.testing.assert_allclose(p, ref_probs[t], rtol=1e-10, atol=1e-14)
        pol = ep.feedback(pol, ep.ExpertRound(costs[t], viol[t]), p)
        # scale tracks 1 + Phi'(Q) exactly
        assert pol.hedge.scale == pytest.approx(1 + pol.ccv.phi_prime, rel=1e-9)
    assert pol.ccv.q == pytest.approx(ref_q, rel=1e-12)


def test_zero_violation_keeps_q():
    pol = ep.init(3, 10, 0.5)
    p = ep.act(pol)
    nxt = ep.feedback(pol, ep.ExpertRound([0.2, 0.5, 0.9], [0, 0, 0]), p)
    assert nxt.ccv.q == 0.0
    np.testing.assert_allclose(nxt.hedge.cum_losses, [0.2 + 0, 0.5, 0.9])


def test_full_violation_adds_one():
    pol = ep.init(4, 10, 0.5)
    nxt = ep.feedback(pol, ep.ExpertRound(np.zeros(4), np.ones(4)), ep.act(pol))
    assert nxt.ccv.q == pytest.approx(1.0)


def test_lower_surrogate_loss_gets_more_mass():
    pol = ep.init(2, 10, 0.5)
    pol = ep.feedback(pol, ep.ExpertRound([0.0, 0.4], [0.0, 0.0]), ep.act(pol))
    p = ep.act(pol)
    assert p[0] > p[1]


def test_surrogate_cost_examples():
    np.testing.assert_allclose(ep.surrogate_cost([0.2, 0.8], [1, 0], 2.0), [2.2, 0.8])
    np.testing.assert_allclose(ep.surrogate_cost([0.3, 0.1], [0.7, 1], 0.0), [0.3, 0.1])
    # phi'(Q=10) with lam=0.1
    assert ep.surrogate_cost([0.5], [1.0], 0.1 * math.e)[0] == pytest.approx(0.77183, abs=1e-5)


def test_surrogate_sup_norm():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        f, g, phi = rng.random(5), rng.random(5), rng.exponential()
        assert np.max(np.abs(ep.surrogate_cost(f, g, phi))) <= 1 + phi + 1e-12


def test_expert_round_validation():
    with pytest.raises(ValueError):
        ep.ExpertRound([0.1, 1.2], [0, 0])
    with pytest.raises(ValueError):
        ep.ExpertRound([0.1, 0.2], [0, -0.1])
    with pytest.raises(ValueError):
        ep.ExpertRound([0.1, 0.2], [0, 0, 0])
    with pytest.raises(ValueError):
        ep.feedback(ep.init(3, 5, 0.5), ep.ExpertRound([0, 0], [0, 0]), [0.5, 0.5])


def test_baseline_default_eta_and_update():
    b = ep.baseline_init(20, 5000, 0.75)
    assert b.eta == pytest.approx(math.sqrt(8 * math.log(20) / 5000))
    p = ep.baseline_act(b)
    np.testing.assert_allclose(p, 1 / 20)
    b2 = ep.baseline_feedback(b, ep.ExpertRound(np.full(20, 0.5), np.zeros(20)), p)
    np.testing.assert_allclose(b2.cum_losses, 0.5)
    assert ep.baseline_init(3, 10, 0.5, eta=0.3).eta == 0.3


def test_draw_expert_frequencies():
    rng = np.random.default_rng(1)
    p = np.array([0.1, 0.6, 0.3])
    draws = np.array([ep.draw_expert(p, rng) for _ in range(20000)])
    np.testing.assert_allclose(np.bincount(draws, minlength=3) / 20000, p, atol=0.015)
    assert ep.draw_expert(np.array([0.0, 1.0]), rng) == 1


def test_hedge_regret_against_feasible_expert_small():
    rng = np.random.default_rng(3)
    T, n = 400, 5
    costs = rng.random((T, n))
    viol = rng.random((T, n))
    viol[:, 2] = 0.0
    pol = ep.init(n, T, 0.5)
    for t in range(T):
        pol = ep.feedback(pol, ep.ExpertRound(costs[t], viol[t]), ep.act(pol))
    h = pol.hedge
    bound = hedge.adaptive_regret_bound(h.cum_losses.min(), h.scale, n, h.gamma)
    assert h.algo_loss - h.cum_losses.min() <= bound
