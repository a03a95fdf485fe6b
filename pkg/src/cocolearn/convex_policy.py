"""Policies for general convex decision sets.

* Cover reduction: the constrained expert policy runs over the centers of
  a delta-cover and the learner plays their probability-weighted mix.
* Smooth surrogate OGD: projected online gradient descent with adaptive step
  ``D / sqrt(2 sum ||grad||^2)`` on ``f_t + Phi'(Q(t)) g_t``.
* Pure OGD for online constraint satisfaction: the same OGD on ``g_t`` alone.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import expert_policy
from .core import CcvTracker, ccv_update
from .exceptions import UnnormalizedOracleError
from .expert_policy import ConstrainedExpertPolicy, ExpertRound
from .geometry import Cover, DecisionSet

_UNIT_SLACK = 1e-9


@dataclass(frozen=True)
class ConvexFunctionOracle:
    """Value/gradient oracle for one round's cost or constraint function."""

    value: Callable
    gradient: Callable
    lipschitz: Optional[float] = None
    smoothness: Optional[float] = None
    nonnegative: bool = True
    batch: Optional[Callable] = None

    def __call__(self, x):
        return self.value(x)

    def values(self, points):
        """Values at each row of ``points``; uses ``batch`` when supplied."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.batch is not None:
            return np.asarray(self.batch(points), dtype=float).reshape(points.shape[0])
        return np.array([float(self.value(x)) for x in points])


def check_gradient(oracle, points, h=1e-5, rtol=1e-4):
    """Largest relative error between ``oracle.gradient`` and central differences.

    Returns ``(ok, worst)`` where ``ok`` is ``worst <= rtol``.
    """
    worst = 0.0
    for x in np.atleast_2d(points):
        x = np.asarray(x, dtype=float)
        fd = np.empty_like(x)
        for k in range(x.size):
            e = np.zeros_like(x)
            e[k] = h
            fd[k] = (oracle.value(x + e) - oracle.value(x - e)) / (2 * h)
        g = np.asarray(oracle.gradient(x), dtype=float)
        err = np.linalg.norm(g - fd) / max(np.linalg.norm(fd), np.linalg.norm(g), 1e-8)
        worst = max(worst, float(err))
    return worst <= rtol, worst


def check_smoothness(oracle, points, M, tol=1e-9):
    """Warn if ``||grad(x) - grad(y)|| > M ||x - y||`` on consecutive sample pairs.

    Returns the largest observed secant ratio.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    worst = 0.0
    for x, y in zip(points[:-1], points[1:]):
        gap = np.linalg.norm(x - y)
        if gap == 0:
            continue
        ratio = np.linalg.norm(np.asarray(oracle.gradient(x)) - np.asarray(oracle.gradient(y))) / gap
        worst = max(worst, float(ratio))
    if worst > M * (1 + tol):
        warnings.warn(f"declared smoothness M={M} is below an observed secant ratio {worst:.6g}", RuntimeWarning)
    return worst


# ---------------------------------------------------------------------------
# Cover reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoverPolicy:
    cover: Cover
    inner: ConstrainedExpertPolicy
    lipschitz: float

    @property
    def delta(self):
        return self.cover.delta


def cover_policy_init(cover, T, beta, lipschitz):
    if len(cover) < 2:
        # one center: the inner expert problem is degenerate, pad with a copy
        cover = Cover(np.repeat(cover.centers, 2, axis=0), cover.delta, cover.source_set)
    inner = expert_policy.init(len(cover), T, beta)
    return CoverPolicy(cover, inner, float(lipschitz))


def _unit_values(oracle, centers, what):
    vals = oracle.values(centers)
    if np.any(vals < -_UNIT_SLACK) or np.any(vals > 1.0 + _UNIT_SLACK) or np.any(np.isnan(vals)):
        raise UnnormalizedOracleError(f"{what} oracle returned values outside [0, 1]")
    return np.clip(vals, 0.0, 1.0)


def cover_transform(cover, f_t, g_t, G, delta):
    """Expert-problem round: cost ``f_t(x^i)``, violation ``(g_t(x^i) - G delta)^+``."""
    cost = _unit_values(f_t, cover.centers, "cost")
    violation = np.maximum(_unit_values(g_t, cover.centers, "constraint") - G * delta, 0.0)
    return ExpertRound(cost, violation)


def mix_centers(cover, probs):
    return np.asarray(probs, dtype=float) @ cover.centers


def cover_policy_act(policy):
    """Point played this round: the Hedge-weighted combination of centers."""
    return mix_centers(policy.cover, expert_policy.act(policy.inner))


def cover_policy_feedback(policy, f_t, g_t, played):
    """Update the inner expert policy; ``played`` is the distribution used to act."""
    rnd = cover_transform(policy.cover, f_t, g_t, policy.lipschitz, policy.delta)
    inner = expert_policy.feedback(policy.inner, rnd, played)
    return CoverPolicy(policy.cover, inner, policy.lipschitz), rnd


# ---------------------------------------------------------------------------
# Projected OGD with adaptive steps
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SmoothOgdPolicy:
    set: DecisionSet
    current: np.ndarray
    ccv: CcvTracker
    grad_sq_sum: float = 0.0
    eta: float = math.inf

    @property
    def lyapunov(self):
        return self.ccv.lyapunov


def smooth_init(decision_set, lyapunov=None, x1=None):
    """OGD policy starting at ``x1`` (default: projection of the origin)."""
    if x1 is None:
        x1 = decision_set.project(np.zeros(decision_set.dimension))
    x1 = np.asarray(x1, dtype=float)
    if not decision_set.contains(x1):
        raise ValueError("starting point must lie in the decision set")
    return SmoothOgdPolicy(decision_set, x1, CcvTracker(lyapunov))


def _ogd_move(policy, grad, ccv):
    grad_sq_sum = policy.grad_sq_sum + float(grad @ grad)
    if grad_sq_sum <= 0.0:
        # no gradient information yet: hold position
        return SmoothOgdPolicy(policy.set, policy.current, ccv, grad_sq_sum, math.inf)
    eta = policy.set.diameter / math.sqrt(2.0 * grad_sq_sum)
    nxt = policy.set.project(policy.current - eta * grad)
    return SmoothOgdPolicy(policy.set, nxt, ccv, grad_sq_sum, eta)


def smooth_ogd_step(policy, f_t, g_t):
    """Play ``x_t``, then step on the surrogate ``f_t + Phi'(Q(t)) g_t``.

    ``Q`` absorbs ``g_t(x_t)`` before the multiplier is formed. Returns the
    played point and the updated policy.
    """
    x = policy.current
    ccv = ccv_update(policy.ccv, g_t.value(x))
    grad = np.asarray(f_t.gradient(x), dtype=float) + ccv.phi_prime * np.asarray(g_t.gradient(x), dtype=float)
    return x, _ogd_move(policy, grad, ccv)


def pure_ogd_ocs_step(policy, g_t):
    """Play ``x_t``, then step on ``g_t`` alone (no Lyapunov multiplier)."""
    x = policy.current
    ccv = ccv_update(policy.ccv, g_t.value(x))
    grad = np.asarray(g_t.gradient(x), dtype=float)
    return x, _ogd_move(policy, grad, ccv)


def smooth_regret_bound(cum_comparator_loss, D, M):
    """OGD small-loss bound ``4 D sqrt(M L(u)) + 4 D^2 M``."""
    if min(cum_comparator_loss, D, M) < 0:
        raise ValueError("inputs must be nonnegative")
    return 4.0 * D * math.sqrt(M * cum_comparator_loss) + 4.0 * D * D * M
