"""Constrained expert policy: adaptive Hedge on Lyapunov surrogate costs.

Each round the learner plays a distribution ``p_t`` over N experts, then sees
a cost vector ``f_t`` and a violation vector ``g_t`` (both in [0, 1]^N). The
policy adds the realized violation ``<g_t, p_t>`` to the running CCV ``Q``
*first*, and only then forms the surrogate ``f_t + Phi'(Q(t)) g_t`` that is
fed to the Hedge engine with scale bound ``G_t = 1 + Phi'(Q(t))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hedge as _hedge
from .core import CcvTracker, LyapunovConfig, ccv_update, lambda_expert

GAMMA = _hedge.DEFAULT_GAMMA


@dataclass(frozen=True, eq=False)
class ExpertRound:
    """Cost and violation vectors revealed for one round."""

    cost: np.ndarray
    violation: np.ndarray

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=float)
        violation = np.asarray(self.violation, dtype=float)
        if cost.ndim != 1 or cost.shape != violation.shape:
            raise ValueError(f"cost and violation must be equal-length vectors, got {cost.shape}, {violation.shape}")
        for name, vec in (("cost", cost), ("violation", violation)):
            if not (np.all(vec >= 0.0) and np.all(vec <= 1.0)):
                raise ValueError(f"{name} entries must lie in [0, 1]")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "violation", violation)

    @property
    def n(self):
        return self.cost.size


def surrogate_cost(f, g, phi_prime):
    """Entrywise ``f + phi_prime * g``."""
    return np.asarray(f, dtype=float) + phi_prime * np.asarray(g, dtype=float)


@dataclass(frozen=True, eq=False)
class ConstrainedExpertPolicy:
    hedge: _hedge.HedgeState
    ccv: CcvTracker
    horizon: int
    beta: float

    @property
    def lyapunov(self):
        return self.ccv.lyapunov

    @property
    def n(self):
        return self.hedge.n


def init(N, T, beta):
    """Fresh policy for ``N`` experts over a known horizon ``T``."""
    lyap = LyapunovConfig(lambda_expert(T, beta, N))
    ccv = CcvTracker(lyap)
    hedge_state = _hedge.HedgeState.initial(N, gamma=GAMMA, scale=1.0 + ccv.phi_prime)
    return ConstrainedExpertPolicy(hedge_state, ccv, int(T), float(beta))


def act(policy):
    return _hedge.distribution(policy.hedge)


def feedback(policy, round, played):
    """Fold one revealed round into the policy and return the updated policy."""
    played = np.asarray(played, dtype=float)
    if round.n != policy.n:
        raise ValueError(f"round has {round.n} experts, policy has {policy.n}")
    ccv = ccv_update(policy.ccv, float(round.violation @ played))
    phi_prime = ccv.phi_prime
    f_hat = surrogate_cost(round.cost, round.violation, phi_prime)
    hedge_state = _hedge.observe(policy.hedge, f_hat, played, 1.0 + phi_prime)
    return ConstrainedExpertPolicy(hedge_state, ccv, policy.horizon, policy.beta)


@dataclass(frozen=True, eq=False)
class StdHedgeBaseline:
    """Fixed-rate Hedge on the same surrogate costs.

    A stand-in comparison policy; it carries no performance guarantee and is
    excluded from bound checks.
    """

    cum_losses: np.ndarray
    ccv: CcvTracker
    eta: float

    @property
    def n(self):
        return self.cum_losses.size


def baseline_init(N, T, beta, eta=None):
    """Baseline sharing the constrained policy's potential; ``eta`` defaults to ``sqrt(8 ln N / T)``."""
    lyap = LyapunovConfig(lambda_expert(T, beta, N))
    if eta is None:
        eta = math.sqrt(8.0 * math.log(N) / T)
    return StdHedgeBaseline(np.zeros(int(N)), CcvTracker(lyap), float(eta))


def baseline_act(policy):
    return _hedge.standard_hedge_distribution(policy.cum_losses, policy.eta)


def baseline_feedback(policy, round, played):
    played = np.asarray(played, dtype=float)
    ccv = ccv_update(policy.ccv, float(round.violation @ played))
    f_hat = surrogate_cost(round.cost, round.violation, ccv.phi_prime)
    return StdHedgeBaseline(policy.cum_losses + f_hat, ccv, policy.eta)


def draw_expert(probs, rng):
    """Sample one expert index from ``probs`` with a numpy Generator."""
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(idx, len(cdf) - 1)
