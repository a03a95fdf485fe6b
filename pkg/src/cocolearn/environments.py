"""Seeded cost/constraint generators.

Every round is a pure function of ``(seed, t)``: round ``t`` draws from its
own ``numpy.random.Generator`` seeded with ``[seed, t]`` (PCG64 via
``SeedSequence``), so rounds can be produced in any order and streams are
bit-identical across platforms.

Expert indices are 0-based throughout. In the default synthetic layout the
best feasible expert is index 11 and the cheapest infeasible one is index 7.
Indices 2 and 5 are feasible decoys.
"""

from __future__ import annotations

import math
from functools import cached_property
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .convex_policy import ConvexFunctionOracle
from .expert_policy import ExpertRound
from .geometry import Ball, Box, DecisionSet


def round_rng(seed, t):
    return np.random.default_rng([int(seed), int(t)])


# ---------------------------------------------------------------------------
# Expert instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticExpertSpec:
    """Synthetic constrained-expert instance with one cheap feasible expert.

    Special experts draw Bernoulli(mean) costs and violations. The remaining
    experts get ``clip(rest_cost + amplitude sin(2 pi t / period + phi_i) + U[-noise, noise], 0, 1)``
    costs with phase ``phi_i = 2 pi i / n`` and Bernoulli(rest_violation)
    violations.
    """

    n: int = 20
    horizon: int = 5000
    seed: int = 0
    feasible_best: int = 11
    feasible_best_cost: float = 0.21
    unconstrained_best: int = 7
    unconstrained_best_cost: float = 0.11
    unconstrained_best_violation: float = 0.91
    decoys: Tuple[int, ...] = (2, 5)
    decoy_cost: float = 0.41
    rest_cost: float = 0.41
    rest_violation: float = 0.6
    period: float = 500.0
    amplitude: float = 0.15
    noise: float = 0.1

    def __post_init__(self):
        special = {self.feasible_best, self.unconstrained_best, *self.decoys}
        if len(special) != 2 + len(self.decoys):
            raise ValueError("special expert indices must be distinct")
        if any(not 0 <= i < self.n for i in special):
            raise ValueError("special expert index out of range")

    @property
    def kind(self):
        return "expert"

    @property
    def feasible_experts(self):
        return tuple(sorted((self.feasible_best, *self.decoys)))

    @property
    def comparator(self):
        return self.feasible_best

    def _rest_mask(self):
        mask = np.ones(self.n, dtype=bool)
        mask[[self.feasible_best, self.unconstrained_best, *self.decoys]] = False
        return mask


def synthetic_expert_round(spec, t):
    """Cost and violation vectors for round ``t`` (1-based)."""
    if not 1 <= t <= spec.horizon:
        raise ValueError(f"round {t} outside [1, {spec.horizon}]")
    rng = round_rng(spec.seed, t)
    u_cost = rng.random(spec.n)
    u_viol = rng.random(spec.n)
    jitter = rng.uniform(-spec.noise, spec.noise, spec.n)

    rest = spec._rest_mask()
    phase = 2.0 * math.pi * np.arange(spec.n) / spec.n
    periodic = spec.rest_cost + spec.amplitude * np.sin(2.0 * math.pi * t / spec.period + phase) + jitter
    cost = np.where(rest, np.clip(periodic, 0.0, 1.0), 0.0)
    violation = np.where(rest, (u_viol < spec.rest_violation).astype(float), 0.0)

    cost[spec.feasible_best] = float(u_cost[spec.feasible_best] < spec.feasible_best_cost)
    ub = spec.unconstrained_best
    cost[ub] = float(u_cost[ub] < spec.unconstrained_best_cost)
    violation[ub] = float(u_viol[ub] < spec.unconstrained_best_violation)
    for i in spec.decoys:
        cost[i] = float(u_cost[i] < spec.decoy_cost)
    return ExpertRound(cost, violation)


def ocs_expert_round(spec, t):
    """Same violations as :func:`synthetic_expert_round`, costs forced to zero."""
    rnd = synthetic_expert_round(spec, t)
    return ExpertRound(np.zeros(spec.n), rnd.violation)


def expert_stream(spec, round_fn=synthetic_expert_round):
    """All rounds of an instance as ``(costs, violations)`` arrays of shape (T, n)."""
    rounds = [round_fn(spec, t) for t in range(1, spec.horizon + 1)]
    if not rounds:
        return np.zeros((0, spec.n)), np.zeros((0, spec.n))
    return np.stack([r.cost for r in rounds]), np.stack([r.violation for r in rounds])


# ---------------------------------------------------------------------------
# Hedge stress stream
# ---------------------------------------------------------------------------


class UnboundedStream(NamedTuple):
    losses: np.ndarray  # (T, n)
    scales: np.ndarray  # (T,), G_1..G_T


def unbounded_loss_stream(n, T, growth, seed, k=1, zero_expert=None):
    """Losses in ``[0, G_t]`` with ``G_t = growth ** (t // k)``.

    Each expert has a fixed level in [0.2, 1]; its round-``t`` loss is
    ``G_t * level * U[0, 1]``. ``zero_expert`` (if given) always gets 0.
    """
    if growth < 1:
        raise ValueError(f"growth must be >= 1, got {growth!r}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k!r}")
    rng = np.random.default_rng([int(seed), int(n), int(T)])
    levels = rng.uniform(0.2, 1.0, n)
    t = np.arange(1, T + 1)
    scales = float(growth) ** (t // k)
    losses = scales[:, None] * levels[None, :] * rng.random((T, n))
    if zero_expert is not None:
        losses[:, zero_expert] = 0.0
    return UnboundedStream(losses, scales.astype(float))


# ---------------------------------------------------------------------------
# Convex instances
# ---------------------------------------------------------------------------


def _center_and_halfwidth(decision_set):
    if isinstance(decision_set, Ball):
        return decision_set.center, decision_set.radius
    lo, hi = decision_set.bounding_box()
    return (lo + hi) / 2.0, decision_set.diameter / 2.0


def _max_distance(decision_set, point):
    """Largest distance from ``point`` to the set (balls and boxes)."""
    if isinstance(decision_set, Ball):
        return float(np.linalg.norm(point - decision_set.center) + decision_set.radius)
    if isinstance(decision_set, Box):
        far = np.maximum(np.abs(point - decision_set.lower), np.abs(decision_set.upper - point))
        return float(np.linalg.norm(far))
    raise TypeError(f"unsupported set for convex instances: {decision_set!r}")


def _linear_cost(rng, spec):
    """``f(x) = (1 + <c, x - center> / r) / 2``, ``||c|| <= 1``, so f lies in [0, 1]."""
    center, r = _center_and_halfwidth(spec.set)
    c = np.asarray(spec.cost_mean, dtype=float) + spec.cost_noise * rng.standard_normal(spec.set.dimension)
    norm = np.linalg.norm(c)
    if norm > 1.0:
        c = c / norm
    grad = c / (2.0 * r)

    def value(x):
        return 0.5 + float(grad @ (np.asarray(x, dtype=float) - center))

    def batch(points):
        return 0.5 + (points - center) @ grad

    return ConvexFunctionOracle(value, lambda x: grad, lipschitz=1.0 / (2.0 * r), smoothness=0.0, batch=batch)


def _default_cost_mean(d):
    mean = np.zeros(d)
    mean[0] = 0.6
    if d > 1:
        mean[1] = 0.3
    return tuple(mean)


@dataclass(frozen=True, eq=False)
class SmoothInstanceSpec:
    """Smooth convex instance with a known feasible point.

    Constraint: ``g_t(x) = b + (1 - b) a_t ||x - x*||^2 / R^2`` where
    ``a_t ~ U[amp_low, 1]``, ``R`` is the largest distance from ``x*`` to the
    set, and ``b = budget / horizon`` (zero in the strictly feasible case).
    Cost: linear ``(1 + <c_t, x - center>/r) / 2`` with ``c_t`` a noisy copy of
    ``cost_mean`` clipped to the unit ball.
    """

    set: DecisionSet = field(default_factory=lambda: Ball(np.zeros(2), 1.0))
    feasible_point: Optional[np.ndarray] = None
    start: Optional[np.ndarray] = None
    cost_mean: Optional[tuple] = None
    cost_noise: float = 0.3
    amp_low: float = 0.5
    budget: float = 0.0
    horizon: int = 1
    seed: int = 0

    def __post_init__(self):
        d = self.set.dimension
        x_star = self.set.project(np.zeros(d)) if self.feasible_point is None else np.asarray(self.feasible_point, dtype=float)
        if not self.set.contains(x_star):
            raise ValueError("feasible point must lie in the decision set")
        object.__setattr__(self, "feasible_point", x_star)
        if self.start is None:
            # farthest corner/boundary point from x*, along the first axis
            lo, hi = self.set.bounding_box()
            e = np.zeros(d)
            e[0] = hi[0] if hi[0] - x_star[0] >= x_star[0] - lo[0] else lo[0]
            start = x_star.copy()
            start[0] = e[0]
            object.__setattr__(self, "start", self.set.project(start))
        else:
            object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
        if self.cost_mean is None:
            object.__setattr__(self, "cost_mean", _default_cost_mean(d))
        if not 0.0 <= self.amp_low <= 1.0:
            raise ValueError("amp_low must lie in [0, 1]")
        if not 0.0 <= self.budget <= max(self.horizon, 0):
            raise ValueError("budget must lie in [0, horizon]")

    @property
    def kind(self):
        return "convex"

    @property
    def comparator(self):
        return self.feasible_point

    @cached_property
    def reach(self):
        return _max_distance(self.set, self.feasible_point)

    @property
    def offset(self):
        return self.budget / self.horizon if self.horizon > 0 else 0.0

    @cached_property
    def smoothness(self):
        """Declared M: smoothness of the constraint family (costs are linear)."""
        return 2.0 * (1.0 - self.offset) / self.reach**2

    @cached_property
    def lipschitz(self):
        center, r = _center_and_halfwidth(self.set)
        return max(1.0 / (2.0 * r), 2.0 * (1.0 - self.offset) / self.reach)


def smooth_round(spec, t):
    """Cost and constraint oracles for round ``t``; ``g_t(x*) = offset``."""
    rng = round_rng(spec.seed, t)
    f = _linear_cost(rng, spec)
    amp = rng.uniform(spec.amp_low, 1.0)
    x_star = spec.feasible_point
    b = spec.offset
    scale = (1.0 - b) * amp / spec.reach**2

    def value(x):
        diff = np.asarray(x, dtype=float) - x_star
        return b + scale * float(diff @ diff)

    def gradient(x):
        return 2.0 * scale * (np.asarray(x, dtype=float) - x_star)

    def batch(points):
        diff = points - x_star
        return b + scale * np.einsum("ij,ij->i", diff, diff)

    g = ConvexFunctionOracle(value, gradient, lipschitz=spec.lipschitz, smoothness=2.0 * scale, batch=batch)
    return f, g


@dataclass(frozen=True, eq=False)
class LipschitzInstanceSpec:
    """Non-smooth convex instance for the cover reduction.

    Constraint: ``g_t(x) = a_t max(0, ||x - x*|| - rho_t) / max(1, R)`` with
    ``a_t ~ U[amp_low, 1]`` and ``rho_t ~ U[0, slack R]``; zero on a ball
    around ``x*``. At the kink the zero subgradient is used.
    """

    set: DecisionSet = field(default_factory=lambda: Box([0.0], [1.0]))
    feasible_point: Optional[np.ndarray] = None
    cost_mean: Optional[tuple] = None
    cost_noise: float = 0.3
    amp_low: float = 0.5
    slack: float = 0.2
    horizon: int = 1
    seed: int = 0

    def __post_init__(self):
        d = self.set.dimension
        if self.feasible_point is None:
            lo, hi = self.set.bounding_box()
            x_star = self.set.project(lo + 0.3 * (hi - lo))
        else:
            x_star = np.asarray(self.feasible_point, dtype=float)
        if not self.set.contains(x_star):
            raise ValueError("feasible point must lie in the decision set")
        object.__setattr__(self, "feasible_point", x_star)
        if self.cost_mean is None:
            object.__setattr__(self, "cost_mean", _default_cost_mean(d))

    @property
    def kind(self):
        return "convex"

    @property
    def comparator(self):
        return self.feasible_point

    @property
    def budget(self):
        return 0.0

    @cached_property
    def reach(self):
        return _max_distance(self.set, self.feasible_point)

    @cached_property
    def lipschitz(self):
        center, r = _center_and_halfwidth(self.set)
        return max(1.0 / (2.0 * r), 1.0 / max(1.0, self.reach))


def lipschitz_round(spec, t):
    rng = round_rng(spec.seed, t)
    f = _linear_cost(rng, spec)
    amp = rng.uniform(spec.amp_low, 1.0)
    rho = rng.uniform(0.0, spec.slack * spec.reach)
    x_star = spec.feasible_point
    scale = amp / max(1.0, spec.reach)

    def value(x):
        return scale * max(0.0, float(np.linalg.norm(np.asarray(x, dtype=float) - x_star)) - rho)

    def gradient(x):
        diff = np.asarray(x, dtype=float) - x_star
        dist = float(np.linalg.norm(diff))
        if dist <= rho or dist == 0.0:
            return np.zeros_like(diff)
        return scale * diff / dist

    def batch(points):
        return scale * np.maximum(0.0, np.linalg.norm(points - x_star, axis=1) - rho)

    return f, ConvexFunctionOracle(value, gradient, lipschitz=scale, smoothness=None, batch=batch)
