"""Experiment runner. Plays a policy against an environment for T rounds
and checks the guaranteed bounds on the finished record.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from . import convex_policy as cvx
from . import expert_policy as ep
from . import hedge
from .core import LyapunovConfig, lambda_budget, lambda_smooth
from .environments import (
    LipschitzInstanceSpec,
    SmoothInstanceSpec,
    SyntheticExpertSpec,
    lipschitz_round,
    ocs_expert_round,
    smooth_round,
    synthetic_expert_round,
)
from .exceptions import CocoError, InfeasibleInstanceError, ProtocolError, RunAbortedError
from .geometry import build_cover, parse_set

POLICIES = ("constrained-expert", "cover-reduction", "smooth-ogd", "pure-ogd-ocs", "std-hedge-baseline")
EXPERT_ENVIRONMENTS = ("synthetic-expert", "ocs-expert")
CONVEX_ENVIRONMENTS = ("smooth", "lipschitz")

GAMMA_CAP = 1.08
SMALL_LOSS_CONST = 10.0
REL_TOL = 1e-9


def _parse_vector(text):
    if text is None or isinstance(text, (list, tuple)):
        return None if text is None else tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).split(",") if v.strip())


@dataclass
class RunConfig:
    """One experiment. Field names double as keys of the flat config file."""

    policy: str = "constrained-expert"
    environment: str = "synthetic-expert"
    horizon: int = 5000
    beta: float = 0.75
    seed: int = 0
    n_experts: int = 20
    decision_set: Optional[str] = None
    feasible_point: Optional[tuple] = None
    budget: float = 0.0
    c_budget: float = 8.0
    delta: Optional[float] = None
    eta: Optional[float] = None
    sample_seed: Optional[int] = None
    output: Optional[str] = None
    check_bounds: bool = True

    def __post_init__(self):
        self.horizon = int(self.horizon)
        self.seed = int(self.seed)
        self.n_experts = int(self.n_experts)
        self.beta = float(self.beta)
        self.budget = float(self.budget)
        self.c_budget = float(self.c_budget)
        self.feasible_point = _parse_vector(self.feasible_point)
        if self.delta is not None:
            self.delta = float(self.delta)
        if self.eta is not None:
            self.eta = float(self.eta)
        if self.sample_seed is not None:
            self.sample_seed = int(self.sample_seed)
        if isinstance(self.check_bounds, str):
            self.check_bounds = self.check_bounds.strip().lower() in ("1", "true", "yes", "on")
        self.validate()

    def validate(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}; choose from {POLICIES}")
        if self.environment not in EXPERT_ENVIRONMENTS + CONVEX_ENVIRONMENTS:
            raise ValueError(f"unknown environment {self.environment!r}")
        expert_policy = self.policy in ("constrained-expert", "std-hedge-baseline")
        if expert_policy != (self.environment in EXPERT_ENVIRONMENTS):
            raise ValueError(f"policy {self.policy!r} is incompatible with environment {self.environment!r}")
        if self.policy in ("smooth-ogd", "pure-ogd-ocs") and self.environment != "smooth":
            raise ValueError(f"policy {self.policy!r} needs the smooth environment")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.budget and self.environment != "smooth":
            raise ValueError("a violation budget is only supported by the smooth environment")

    @property
    def effective_sample_seed(self):
        return self.seed + 1_000_003 if self.sample_seed is None else self.sample_seed

    def to_dict(self):
        out = dataclasses.asdict(self)
        if out["feasible_point"] is not None:
            out["feasible_point"] = list(out["feasible_point"])
        return out

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        self.passed = leq(self.lhs, self.rhs)

    @property
    def margin(self):
        return self.rhs - self.lhs

    def to_dict(self):
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "passed": self.passed}


def leq(lhs, rhs, rel=REL_TOL):
    """``lhs <= rhs`` up to a relative tolerance."""
    return lhs <= rhs + rel * max(1.0, abs(lhs), abs(rhs))


@dataclass
class RunRecord:
    config: RunConfig
    t: np.ndarray
    cost: np.ndarray
    violation: np.ndarray
    q: np.ndarray
    eta: np.ndarray
    scale: np.ndarray
    argmax_expert: np.ndarray
    regret_path: np.ndarray
    sampled_expert: Optional[np.ndarray] = None
    probs: Optional[np.ndarray] = None
    points: Optional[np.ndarray] = None
    regret: float = 0.0
    ccv: float = 0.0
    comparator: Any = None
    comparator_cost: float = 0.0
    checks: List[BoundCheck] = field(default_factory=list)
    frequencies: Optional[Dict[str, list]] = None
    extra: Dict[str, float] = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def horizon(self):
        return int(self.t.size)

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c for c in self.checks if not c.passed]


class RoundProtocol:
    """Enforces act-then-reveal: the round outcome is released only after the
    learner has committed its action for that round."""

    def __init__(self, reveal_fn):
        self._reveal = reveal_fn
        self._committed = None
        self.round = 0

    def commit(self, action):
        if self._committed is not None:
            raise ProtocolError(f"round {self.round + 1}: action already committed")
        self._committed = action

    def reveal(self):
        if self._committed is None:
            raise ProtocolError(f"round {self.round + 1}: outcome requested before the action was committed")
        self.round += 1
        self._committed = None
        return self._reveal(self.round)


def best_feasible_comparator(cum_cost, cum_violation):
    """Index of the cheapest expert with zero total violation (lowest index on ties)."""
    cum_cost = np.asarray(cum_cost, dtype=float)
    feasible = np.flatnonzero(np.asarray(cum_violation, dtype=float) == 0.0)
    if feasible.size == 0:
        raise InfeasibleInstanceError("no expert has zero cumulative violation")
    return int(feasible[np.argmin(cum_cost[feasible])])


def make_environment(config):
    T = max(config.horizon, 1)
    if config.environment in EXPERT_ENVIRONMENTS:
        spec = SyntheticExpertSpec(n=config.n_experts, horizon=T, seed=config.seed)
        fn = synthetic_expert_round if config.environment == "synthetic-expert" else ocs_expert_round
        return spec, (lambda t: fn(spec, t))
    kwargs = {"horizon": T, "seed": config.seed}
    if config.decision_set:
        kwargs["set"] = parse_set(config.decision_set)
    if config.feasible_point is not None:
        kwargs["feasible_point"] = np.asarray(config.feasible_point, dtype=float)
    if config.environment == "smooth":
        spec = SmoothInstanceSpec(budget=config.budget, **kwargs)
        return spec, (lambda t: smooth_round(spec, t))
    spec = LipschitzInstanceSpec(**kwargs)
    return spec, (lambda t: lipschitz_round(spec, t))


def _empty_record(config, start):
    z = np.zeros(0)
    return RunRecord(config, np.zeros(0, dtype=int), z, z, z, z, z, np.zeros(0, dtype=int), z,
                     wall_time=time.perf_counter() - start)


def run(config):
    """Execute one configured run and return its :class:`RunRecord`.

    Raises
    ------
    RunAbortedError
        A policy-level error occurred; ``.round`` holds the failing round.
    """
    start = time.perf_counter()
    if config.horizon == 0:
        return _empty_record(config, start)
    spec, reveal = make_environment(config)
    runner = {
        "constrained-expert": _run_expert,
        "std-hedge-baseline": _run_expert,
        "cover-reduction": _run_cover,
        "smooth-ogd": _run_smooth,
        "pure-ogd-ocs": _run_smooth,
    }[config.policy]
    record = runner(config, spec, RoundProtocol(reveal))
    record.wall_time = time.perf_counter() - start
    return record


def _abort(round_index, exc):
    raise RunAbortedError(round_index, exc) from exc


def _frequencies(probs, sampled, n):
    T = probs.shape[0]
    return {
        "expected": (probs.sum(axis=0) / T).tolist(),
        "sampled": (np.bincount(sampled, minlength=n) / T).tolist(),
    }


def _expert_checks(policy, T, comparator, cum_cost, cum_violation, played_cost, max_ratio):
    """Bound checks shared by the constrained expert policy and the cover reduction."""
    h = policy.hedge
    n = h.n
    lyap = policy.lyapunov
    q_T = policy.ccv.q
    phi_T = lyap.value(q_T)
    phi_0 = lyap.value(0.0)
    phi_prime_T = policy.ccv.phi_prime
    checks = [BoundCheck("gamma_ratio", max_ratio, GAMMA_CAP)]

    l_star = float(h.cum_losses.min())
    checks.append(BoundCheck("hedge_small_loss", h.algo_loss - l_star,
                             hedge.adaptive_regret_bound(l_star, h.scale, n, h.gamma)))

    # regret decomposition for every expert; report the tightest one
    lhs = phi_T - phi_0 + (played_cost - cum_cost)
    rhs = (h.algo_loss - h.cum_losses) + phi_prime_T * cum_violation
    worst = int(np.argmax(lhs - rhs))
    checks.append(BoundCheck("regret_decomposition", lhs[worst], rhs[worst]))

    if comparator is not None:
        g_T = 1.0 + phi_prime_T
        log_n = math.log(n)
        bound = SMALL_LOSS_CONST * math.sqrt(T * g_T * log_n) + SMALL_LOSS_CONST * g_T * log_n
        checks.append(BoundCheck("surrogate_small_loss", h.algo_loss - h.cum_losses[comparator], bound))
    checks.append(BoundCheck("ccv_at_most_T", q_T, T))
    return checks


def _run_expert(config, spec, protocol):
    T, n = config.horizon, spec.n
    baseline = config.policy == "std-hedge-baseline"
    if baseline:
        policy = ep.baseline_init(n, T, config.beta, config.eta)
        act, feedback = ep.baseline_act, ep.baseline_feedback
    else:
        policy = ep.init(n, T, config.beta)
        act, feedback = ep.act, ep.feedback
    rng = np.random.default_rng(config.effective_sample_seed)

    cols = {k: np.zeros(T) for k in ("cost", "violation", "q", "eta", "scale")}
    probs = np.zeros((T, n))
    sampled = np.zeros(T, dtype=int)
    cum_cost = np.zeros(n)
    cum_violation = np.zeros(n)
    costs = np.zeros((T, n))
    max_ratio = 1.0
    prev_scale = 1.0 + policy.ccv.phi_prime
    for i in range(T):
        try:
            eta = policy.eta if baseline else hedge.learning_rate(policy.hedge)
            p = act(policy)
            protocol.commit(p)
            rnd = protocol.reveal()
            policy = feedback(policy, rnd, p)
        except CocoError as exc:
            _abort(i + 1, exc)
        scale = 1.0 + policy.ccv.phi_prime if baseline else policy.hedge.scale
        max_ratio = max(max_ratio, scale / prev_scale)
        prev_scale = scale
        probs[i] = p
        sampled[i] = ep.draw_expert(p, rng)
        costs[i] = rnd.cost
        cols["cost"][i] = rnd.cost @ p
        cols["violation"][i] = rnd.violation @ p
        cols["q"][i] = policy.ccv.q
        cols["eta"][i] = eta
        cols["scale"][i] = scale
        cum_cost += rnd.cost
        cum_violation += rnd.violation

    comparator = best_feasible_comparator(cum_cost, cum_violation)
    played_cost = float(cols["cost"].sum())
    record = RunRecord(
        config, np.arange(1, T + 1), cols["cost"], cols["violation"], cols["q"], cols["eta"], cols["scale"],
        probs.argmax(axis=1), np.cumsum(cols["cost"] - costs[:, comparator]),
        sampled_expert=sampled, probs=probs,
        regret=played_cost - float(cum_cost[comparator]), ccv=float(policy.ccv.q),
        comparator=comparator, comparator_cost=float(cum_cost[comparator]),
        frequencies=_frequencies(probs, sampled, n),
        extra={"lambda": policy.ccv.lyapunov.lam},
    )
    if config.check_bounds:
        if baseline:
            record.checks = [BoundCheck("ccv_at_most_T", policy.ccv.q, T)]
        else:
            record.checks = _expert_checks(policy, T, comparator, cum_cost, cum_violation, played_cost, max_ratio)
    return record


def _run_cover(config, spec, protocol):
    T = config.horizon
    delta = config.delta if config.delta is not None else 1.0 / T
    G = spec.lipschitz
    cover = build_cover(spec.set, delta)
    policy = cvx.cover_policy_init(cover, T, config.beta, G)
    n = len(policy.cover)
    d = spec.set.dimension
    x_star = spec.feasible_point
    rng = np.random.default_rng(config.effective_sample_seed)

    cols = {k: np.zeros(T) for k in ("cost", "violation", "q", "eta", "scale")}
    probs = np.zeros((T, n))
    points = np.zeros((T, d))
    sampled = np.zeros(T, dtype=int)
    comp_cost = np.zeros(T)
    cum_cost_ce = np.zeros(n)
    cum_violation_ce = np.zeros(n)
    inner_cost = inner_violation = 0.0
    q = 0.0
    max_ratio = 1.0
    prev_scale = policy.inner.hedge.scale
    for i in range(T):
        try:
            eta = hedge.learning_rate(policy.inner.hedge)
            p = ep.act(policy.inner)
            x = cvx.mix_centers(policy.cover, p)
            protocol.commit(x)
            f, g = protocol.reveal()
            policy, rnd = cvx.cover_policy_feedback(policy, f, g, p)
        except CocoError as exc:
            _abort(i + 1, exc)
        scale = policy.inner.hedge.scale
        max_ratio = max(max_ratio, scale / prev_scale)
        prev_scale = scale
        cost, viol = f(x), g(x)
        q += viol
        probs[i] = p
        points[i] = x
        sampled[i] = ep.draw_expert(p, rng)
        comp_cost[i] = f(x_star)
        cols["cost"][i] = cost
        cols["violation"][i] = viol
        cols["q"][i] = q
        cols["eta"][i] = eta
        cols["scale"][i] = scale
        inner_cost += float(rnd.cost @ p)
        inner_violation += float(rnd.violation @ p)
        cum_cost_ce += rnd.cost
        cum_violation_ce += rnd.violation

    played_cost = float(cols["cost"].sum())
    record = RunRecord(
        config, np.arange(1, T + 1), cols["cost"], cols["violation"], cols["q"], cols["eta"], cols["scale"],
        probs.argmax(axis=1), np.cumsum(cols["cost"] - comp_cost),
        sampled_expert=sampled, probs=probs, points=points,
        regret=played_cost - float(comp_cost.sum()), ccv=q,
        comparator=[float(v) for v in x_star], comparator_cost=float(comp_cost.sum()),
        frequencies=_frequencies(probs, sampled, n),
        extra={"lambda": policy.inner.lyapunov.lam, "delta": delta, "lipschitz": G, "n_centers": n,
               "inner_cost": inner_cost, "inner_ccv": inner_violation},
    )
    if config.check_bounds:
        slack = G * delta * T
        inner_feasible = np.flatnonzero(cum_violation_ce == 0.0)
        comparator = int(inner_feasible[np.argmin(cum_cost_ce[inner_feasible])]) if inner_feasible.size else None
        record.checks = _expert_checks(policy.inner, T, comparator, cum_cost_ce, cum_violation_ce,
                                       inner_cost, max_ratio)
        record.checks += [
            BoundCheck("jensen_cost", played_cost - inner_cost, 0.0),
            BoundCheck("cover_cost_slack", played_cost - inner_cost, slack),
            BoundCheck("cover_ccv_slack", q - inner_violation, slack),
        ]
        if comparator is None:
            record.checks.append(BoundCheck("cover_feasible_expert", 1.0, 0.0))
    return record


def smooth_lambda(config, spec):
    T = config.horizon
    if spec.budget > 0:
        return lambda_budget(T, config.beta, spec.budget, config.c_budget)
    return lambda_smooth(T, config.beta, spec.set.diameter, spec.smoothness)


def _run_smooth(config, spec, protocol):
    T = config.horizon
    pure = config.policy == "pure-ogd-ocs"
    lyap = None if pure else LyapunovConfig(smooth_lambda(config, spec))
    policy = cvx.smooth_init(spec.set, lyap, spec.start)
    d = spec.set.dimension
    x_star = spec.feasible_point
    D, M = spec.set.diameter, spec.smoothness

    cols = {k: np.zeros(T) for k in ("cost", "violation", "q", "eta", "scale")}
    points = np.zeros((T, d))
    comp_cost = np.zeros(T)
    surrogate_played = surrogate_comparator = 0.0
    outside = 0
    for i in range(T):
        try:
            protocol.commit(policy.current)
            f, g = protocol.reveal()
            if pure:
                x, policy = cvx.pure_ogd_ocs_step(policy, g)
            else:
                x, policy = cvx.smooth_ogd_step(policy, f, g)
        except CocoError as exc:
            _abort(i + 1, exc)
        viol = g(x)
        if pure:
            cost, phi_prime = 0.0, 0.0
        else:
            cost, phi_prime = f(x), policy.ccv.phi_prime
            comp_cost[i] = f(x_star)
            surrogate_played += cost + phi_prime * viol
            surrogate_comparator += comp_cost[i] + phi_prime * g(x_star)
        outside += not spec.set.contains(x)
        points[i] = x
        cols["cost"][i] = cost
        cols["violation"][i] = viol
        cols["q"][i] = policy.ccv.q
        cols["eta"][i] = policy.eta
        cols["scale"][i] = 1.0 + phi_prime

    played_cost = float(cols["cost"].sum())
    q_T = float(policy.ccv.q)
    record = RunRecord(
        config, np.arange(1, T + 1), cols["cost"], cols["violation"], cols["q"], cols["eta"], cols["scale"],
        np.full(T, -1), np.cumsum(cols["cost"] - comp_cost), points=points,
        regret=played_cost - float(comp_cost.sum()), ccv=q_T,
        comparator=[float(v) for v in x_star], comparator_cost=float(comp_cost.sum()),
        extra={"diameter": D, "smoothness": M, "budget": spec.budget},
    )
    if lyap is not None:
        record.extra["lambda"] = lyap.lam
    if config.check_bounds:
        checks = [BoundCheck("iterates_feasible", outside, 0)]
        if pure:
            checks.append(BoundCheck("ocs_constant_ccv", q_T, 4.0 * D * D * M))
        else:
            phi_T = policy.ccv.phi_prime
            bound = cvx.smooth_regret_bound(T + phi_T * spec.budget, D, M * (1.0 + phi_T))
            checks.append(BoundCheck("surrogate_ogd_small_loss", surrogate_played - surrogate_comparator, bound))
        checks.append(BoundCheck("ccv_at_most_T", q_T, T))
        record.checks = checks
    return record


@dataclass
class SweepRow:
    beta: float
    seed: int
    regret: float
    ccv: float
    passed: bool


def sweep(base, betas, seeds=None):
    """One run per (beta, seed); returns per-run rows and per-beta means."""
    betas = [float(b) for b in betas]
    if len(betas) < 1:
        raise ValueError("need at least one beta")
    seeds = [base.seed] if seeds is None else [int(s) for s in seeds]
    rows = []
    for beta in betas:
        for seed in seeds:
            rec = run(base.replace(beta=beta, seed=seed, output=None))
            rows.append(SweepRow(beta, seed, rec.regret, rec.ccv, rec.all_passed))
    summary = []
    for beta in betas:
        sel = [r for r in rows if r.beta == beta]
        summary.append({
            "beta": beta,
            "regret": float(np.mean([r.regret for r in sel])),
            "regret_sd": float(np.std([r.regret for r in sel])),
            "ccv": float(np.mean([r.ccv for r in sel])),
            "ccv_sd": float(np.std([r.ccv for r in sel])),
            "n_seeds": len(sel),
        })
    return rows, summary
