"""Scalar machinery shared by all policies.

Holds the exponential Lyapunov potential with its rate schedules. CCV
bookkeeping and the [0, 1] normalization of raw values live here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .exceptions import BoundViolationError, CCVOverflowError, UnnormalizedViolationError

# Largest exponent that still exponentiates to a finite double.
_LOG_MAX = math.log(1.7976931348623157e308)

# Slack allowed when a violation computed as <g, p> lands a few ulps outside [0, 1].
_UNIT_SLACK = 1e-9

# Constant ``c`` in the expert-setting rate schedule.
EXPERT_RATE_CONST = 10.0


@dataclass(frozen=True)
class LyapunovConfig:
    """Exponential potential ``Phi(x) = exp(lam * x)``."""

    lam: float

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"lam must be a positive finite number, got {self.lam!r}")

    def log_derivative(self, q):
        """``log Phi'(q) = log(lam) + lam * q``; never overflows."""
        return math.log(self.lam) + self.lam * q

    def derivative(self, q):
        return lyapunov_derivative(self, q)

    def value(self, q):
        exponent = self.lam * q
        if exponent > _LOG_MAX:
            raise CCVOverflowError(f"Phi(Q) overflows at Q={q!r}, lam={self.lam!r}")
        return math.exp(exponent)


def lyapunov_derivative(cfg, q):
    """Return ``Phi'(q) = lam * exp(lam * q)``.

    The product is formed in log space and exponentiated once, so the only
    way to fail is a genuinely unrepresentable result, reported as
    :class:`CCVOverflowError`.
    """
    if q < 0:
        raise ValueError(f"q must be nonnegative, got {q!r}")
    log_value = cfg.log_derivative(q)
    if log_value > _LOG_MAX:
        raise CCVOverflowError(
            f"Phi'(Q) overflows: log Phi'(Q) = {log_value:.6g} at Q={q!r}, lam={cfg.lam!r}"
        )
    return math.exp(log_value)


def _check_beta(beta):
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta!r}")


def _check_horizon(T):
    if T < 1:
        raise ValueError(f"horizon must be a positive integer, got {T!r}")


def lambda_expert(T, beta, N):
    """Rate for the constrained expert policy: ``T^-(1-beta) / (2 c ln N)``, c = 10."""
    _check_horizon(T)
    _check_beta(beta)
    if N < 2:
        raise ValueError(f"need at least two experts, got N={N!r}")
    return T ** (-(1.0 - beta)) / (2.0 * EXPERT_RATE_CONST * math.log(N))


def lambda_smooth(T, beta, D, M):
    """Rate for the smooth surrogate-OGD policy: ``T^-(1-beta) / (8 D^2 M)``."""
    _check_horizon(T)
    _check_beta(beta)
    if D <= 0 or M <= 0:
        raise ValueError(f"diameter and smoothness must be positive, got D={D!r}, M={M!r}")
    return T ** (-(1.0 - beta)) / (8.0 * D * D * M)


def lambda_budget(T, beta, budget, c_budget):
    """Rate under a long-term violation budget: ``min(1/(c B_T), T^-(1-beta))``.

    A zero budget drops the first branch (it would be +inf).
    """
    _check_horizon(T)
    _check_beta(beta)
    if c_budget <= 0:
        raise ValueError(f"c_budget must be positive, got {c_budget!r}")
    if budget < 0:
        raise ValueError(f"budget must be nonnegative, got {budget!r}")
    rate = T ** (-(1.0 - beta))
    if budget > 0:
        rate = min(1.0 / (c_budget * budget), rate)
    return rate


@dataclass(frozen=True)
class CcvTracker:
    """Cumulative constraint violation ``Q(t)`` and the round counter.

    ``lyapunov`` may be None for policies that only count violation.
    """

    lyapunov: Optional[LyapunovConfig] = None
    q: float = 0.0
    round: int = 0

    @property
    def phi_prime(self):
        if self.lyapunov is None:
            raise ValueError("tracker has no Lyapunov potential attached")
        return lyapunov_derivative(self.lyapunov, self.q)

    @property
    def log_phi_prime(self):
        return self.lyapunov.log_derivative(self.q)


def ccv_update(tracker, violation):
    """Add one round's violation (which must lie in [0, 1]) to ``Q``."""
    v = float(violation)
    if not (-_UNIT_SLACK <= v <= 1.0 + _UNIT_SLACK) or math.isnan(v):
        raise UnnormalizedViolationError(f"per-round violation must lie in [0, 1], got {v!r}")
    v = min(max(v, 0.0), 1.0)
    return replace(tracker, q=tracker.q + v, round=tracker.round + 1)


@dataclass(frozen=True)
class ProblemScale:
    """Problem constants shared by policies and bound checks.

    Only the fields relevant to a given setting need to be meaningful; the
    expert setting ignores the geometric ones and vice versa.
    """

    horizon: int
    beta: float = 0.5
    n_experts: int = 2
    dimension: int = 1
    diameter: float = 1.0
    lipschitz: float = 1.0
    smoothness: float = 1.0
    budget: float = 0.0

    def __post_init__(self):
        if self.horizon < 0:
            raise ValueError(f"horizon must be nonnegative, got {self.horizon!r}")
        _check_beta(self.beta)
        if self.n_experts < 2:
            raise ValueError(f"n_experts must be >= 2, got {self.n_experts!r}")
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension!r}")
        for name in ("diameter", "lipschitz", "smoothness"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 0 <= self.budget <= max(self.horizon, 0):
            raise ValueError(f"budget must lie in [0, horizon], got {self.budget!r}")


@dataclass(frozen=True)
class Normalizer:
    """Affine map of raw costs ``|f| <= k_f`` and violations ``0 <= g <= k_g`` into [0, 1]."""

    k_f: float
    k_g: float

    def __post_init__(self):
        if not (self.k_f > 0 and self.k_g > 0):
            raise ValueError(f"bounds must be positive, got k_f={self.k_f!r}, k_g={self.k_g!r}")

    def __call__(self, f_raw, g_raw):
        return normalize(f_raw, g_raw, self)


def normalize(f_raw, g_raw, norm):
    """Return ``(f/(2 k_f) + 1/2, g / k_g)``."""
    if abs(f_raw) > norm.k_f:
        raise BoundViolationError(f"|cost| = {abs(f_raw)!r} exceeds k_f = {norm.k_f!r}")
    if not 0 <= g_raw <= norm.k_g:
        raise BoundViolationError(f"violation {g_raw!r} outside [0, k_g = {norm.k_g!r}]")
    return f_raw / (2.0 * norm.k_f) + 0.5, g_raw / norm.k_g
