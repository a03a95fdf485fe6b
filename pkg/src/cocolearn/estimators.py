"""scikit-learn style wrappers around the functional policies.

The learners are online: ``fit`` consumes a whole stream of rounds and
``partial_fit`` continues it. ``predict_proba`` / ``predict`` describe the
action the learner would take next.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import convex_policy as cvx
from . import expert_policy as ep
from ._validation import check_oracle_sequence, check_paired
from .core import LyapunovConfig, lambda_budget, lambda_smooth
from .geometry import DecisionSet, build_cover


class ConstrainedHedge(BaseEstimator):
    """Constrained expert learner.

    Parameters
    ----------
    horizon : int or None
        Planned number of rounds T. ``None`` uses the length of the first
        batch passed to ``fit``.
    beta : float in [0, 1]
        Trade-off knob: larger values favour lower violation over regret.
    """

    def __init__(self, horizon=None, beta=0.5):
        self.horizon = horizon
        self.beta = beta

    def fit(self, costs, violations):
        """Play through the rounds in ``costs``/``violations`` (shape ``(T, N)``)."""
        costs, violations = check_paired(costs, violations)
        T = self.horizon if self.horizon is not None else costs.shape[0]
        self.policy_ = ep.init(costs.shape[1], int(T), float(self.beta))
        self.n_features_in_ = costs.shape[1]
        self.probs_ = np.zeros((0, costs.shape[1]))
        return self._consume(costs, violations)

    def partial_fit(self, costs, violations):
        if not hasattr(self, "policy_"):
            if self.horizon is None:
                raise ValueError("partial_fit without a prior fit needs an explicit horizon")
            return self.fit(costs, violations)
        costs, violations = check_paired(costs, violations)
        if costs.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} experts, got {costs.shape[1]}")
        return self._consume(costs, violations)

    def _consume(self, costs, violations):
        policy = self.policy_
        rows = []
        for f, g in zip(costs, violations):
            p = ep.act(policy)
            rows.append(p)
            policy = ep.feedback(policy, ep.ExpertRound(f, g), p)
        self.policy_ = policy
        self.probs_ = np.vstack([self.probs_, np.array(rows)])
        self.ccv_ = policy.ccv.q
        self.cost_ = float(np.sum(self.probs_[-len(rows):] * costs)) + getattr(self, "cost_", 0.0)
        return self

    def predict_proba(self, X=None):
        """Next-round distribution over experts, shape ``(1, N)``; ``X`` is ignored."""
        check_is_fitted(self, "policy_")
        return ep.act(self.policy_)[None, :]

    def predict(self, X=None):
        """Most likely next expert (lowest index on ties)."""
        return np.argmax(self.predict_proba(X), axis=1)


class CoverCOCO(BaseEstimator):
    """Cover-reduction learner for Lipschitz convex costs and constraints.

    ``fit`` takes equal-length sequences of cost and constraint oracles
    (objects with ``value(x)`` returning numbers in [0, 1]).
    """

    def __init__(self, decision_set=None, delta=None, lipschitz=1.0, horizon=None, beta=0.5):
        self.decision_set = decision_set
        self.delta = delta
        self.lipschitz = lipschitz
        self.horizon = horizon
        self.beta = beta

    def fit(self, cost_oracles, constraint_oracles):
        if not isinstance(self.decision_set, DecisionSet):
            raise TypeError("decision_set must be a DecisionSet")
        fs = check_oracle_sequence(cost_oracles, "cost_oracles")
        gs = check_oracle_sequence(constraint_oracles, "constraint_oracles")
        if len(fs) != len(gs) or not fs:
            raise ValueError("need equal, nonzero numbers of cost and constraint oracles")
        T = int(self.horizon if self.horizon is not None else len(fs))
        delta = float(self.delta) if self.delta is not None else 1.0 / T
        self.cover_ = build_cover(self.decision_set, delta)
        self.policy_ = cvx.cover_policy_init(self.cover_, T, float(self.beta), float(self.lipschitz))
        self.points_ = np.zeros((0, self.decision_set.dimension))
        self.ccv_ = 0.0
        return self.partial_fit(fs, gs)

    def partial_fit(self, cost_oracles, constraint_oracles):
        check_is_fitted(self, "policy_")
        policy = self.policy_
        pts = []
        for f, g in zip(cost_oracles, constraint_oracles):
            p = ep.act(policy.inner)
            x = cvx.mix_centers(policy.cover, p)
            pts.append(x)
            self.ccv_ += float(g.value(x))
            policy, _ = cvx.cover_policy_feedback(policy, f, g, p)
        self.policy_ = policy
        self.points_ = np.vstack([self.points_, np.array(pts).reshape(-1, self.points_.shape[1])])
        return self

    def predict(self, X=None):
        """Point the learner would play next, shape ``(1, d)``."""
        check_is_fitted(self, "policy_")
        return cvx.cover_policy_act(self.policy_)[None, :]


class SmoothCOCO(BaseEstimator):
    """Surrogate-gradient OGD for smooth convex costs and constraints.

    ``pure=True`` ignores costs and runs OGD on the constraints alone.
    With ``budget > 0`` the rate follows the budgeted schedule.
    """

    def __init__(self, decision_set=None, smoothness=1.0, horizon=None, beta=0.5,
                 budget=0.0, c_budget=8.0, pure=False, x0=None):
        self.decision_set = decision_set
        self.smoothness = smoothness
        self.horizon = horizon
        self.beta = beta
        self.budget = budget
        self.c_budget = c_budget
        self.pure = pure
        self.x0 = x0

    def fit(self, cost_oracles, constraint_oracles):
        if not isinstance(self.decision_set, DecisionSet):
            raise TypeError("decision_set must be a DecisionSet")
        gs = check_oracle_sequence(constraint_oracles, "constraint_oracles")
        fs = [None] * len(gs) if self.pure else check_oracle_sequence(cost_oracles, "cost_oracles")
        if len(fs) != len(gs) or not gs:
            raise ValueError("need equal, nonzero numbers of cost and constraint oracles")
        T = int(self.horizon if self.horizon is not None else len(gs))
        lyap = None
        if not self.pure:
            if self.budget > 0:
                lam = lambda_budget(T, float(self.beta), float(self.budget), float(self.c_budget))
            else:
                lam = lambda_smooth(T, float(self.beta), self.decision_set.diameter, float(self.smoothness))
            lyap = LyapunovConfig(lam)
        self.policy_ = cvx.smooth_init(self.decision_set, lyap, self.x0)
        self.points_ = np.zeros((0, self.decision_set.dimension))
        return self.partial_fit(fs, gs)

    def partial_fit(self, cost_oracles, constraint_oracles):
        check_is_fitted(self, "policy_")
        policy = self.policy_
        pts = []
        for f, g in zip(cost_oracles, constraint_oracles):
            if self.pure:
                x, policy = cvx.pure_ogd_ocs_step(policy, g)
            else:
                x, policy = cvx.smooth_ogd_step(policy, f, g)
            pts.append(x)
        self.policy_ = policy
        self.points_ = np.vstack([self.points_, np.array(pts).reshape(-1, self.points_.shape[1])])
        self.ccv_ = policy.ccv.q
        return self

    def predict(self, X=None):
        check_is_fitted(self, "policy_")
        return self.policy_.current[None, :]
