"""Exponential-weights engines for the expert problem.

:func:`observe`, :func:`learning_rate` and :func:`distribution` implement
Hedge with a self-confident learning rate that tolerates losses whose
magnitude grows over time, provided the caller supplies a non-decreasing
sequence of scale bounds ``G_t`` with bounded consecutive growth ``gamma``.
:func:`standard_hedge_distribution` is the fixed-rate baseline.

States are immutable; every transition returns a new :class:`HedgeState`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import GammaViolationError, ScaleRegressionError

DEFAULT_GAMMA = 1.08

# Relative slack for the scale checks: surrogate losses are built with one
# multiply-add and can exceed their analytic bound by an ulp.
_REL_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class HedgeState:
    """Cumulative quantities of an adaptive Hedge run.

    Attributes
    ----------
    cum_losses : ndarray of shape (n,)
        Cumulative loss of each expert.
    algo_loss : float
        Cumulative expected loss of the learner.
    scale : float
        Current upper bound on the sup-norm of the losses seen so far.
    gamma : float
        Allowed growth factor of ``scale`` between consecutive rounds.
    """

    cum_losses: np.ndarray
    algo_loss: float = 0.0
    scale: float = 1.0
    gamma: float = DEFAULT_GAMMA
    round: int = 0
    n: int = field(init=False)

    def __post_init__(self):
        losses = np.asarray(self.cum_losses, dtype=float)
        if losses.ndim != 1 or losses.size < 2:
            raise ValueError("cum_losses must be a 1-d array with at least two experts")
        losses.flags.writeable = False
        object.__setattr__(self, "cum_losses", losses)
        object.__setattr__(self, "n", losses.size)
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale!r}")
        if not self.gamma >= 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma!r}")

    @classmethod
    def initial(cls, n, gamma=DEFAULT_GAMMA, scale=1.0):
        """Fresh state with zero losses and ``G_0 = scale``."""
        return cls(np.zeros(int(n)), algo_loss=0.0, scale=float(scale), gamma=float(gamma))


def learning_rate(state):
    """Self-confident rate ``sqrt(ln N / (L~ + gamma G)) / sqrt(G)``."""
    g = state.scale
    return math.sqrt(math.log(state.n) / (state.algo_loss + state.gamma * g)) / math.sqrt(g)


def _softmin(cum_losses, eta):
    # max-subtraction keeps exp() in range however large the losses get
    z = -eta * np.asarray(cum_losses, dtype=float)
    z -= z.max()
    w = np.exp(z)
    return w / w.sum()


def distribution(state):
    """Play distribution ``p(i) ~ exp(-eta_t L_{t-1}(i))`` for the next round."""
    return _softmin(state.cum_losses, learning_rate(state))


def standard_hedge_distribution(cum_losses, eta):
    """Fixed-rate Hedge: softmax of ``-eta * cum_losses``."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta!r}")
    return _softmin(cum_losses, eta)


def observe(state, loss, played, scale_bound):
    """Charge ``loss`` against the experts and the learner's ``played`` mix.

    Parameters
    ----------
    state : HedgeState
    loss : array-like of shape (n,)
        Nonnegative losses for the round, with ``max(loss) <= scale_bound``.
    played : array-like of shape (n,)
        The distribution the learner committed to this round.
    scale_bound : float
        The new bound ``G_t``. Must not shrink and must not grow by more than
        ``state.gamma``.

    Raises
    ------
    ScaleRegressionError
        ``scale_bound`` is below the current scale.
    GammaViolationError
        ``scale_bound / state.scale`` exceeds ``gamma``.
    """
    loss = np.asarray(loss, dtype=float)
    played = np.asarray(played, dtype=float)
    if loss.shape != (state.n,) or played.shape != (state.n,):
        raise ValueError(f"expected vectors of length {state.n}, got {loss.shape} and {played.shape}")
    if scale_bound < state.scale:
        raise ScaleRegressionError(f"scale bound {scale_bound!r} is below current scale {state.scale!r}")
    ratio = scale_bound / state.scale
    if ratio > state.gamma * (1.0 + _REL_SLACK):
        raise GammaViolationError(f"scale grew by {ratio!r} > gamma = {state.gamma!r}")
    if loss.min() < 0:
        raise ValueError("losses must be nonnegative")
    if loss.max() > scale_bound * (1.0 + _REL_SLACK):
        raise ValueError(f"max loss {loss.max()!r} exceeds scale bound {scale_bound!r}")
    return HedgeState(
        state.cum_losses + loss,
        algo_loss=state.algo_loss + float(loss @ played),
        scale=float(scale_bound),
        gamma=state.gamma,
        round=state.round + 1,
    )


def adaptive_regret_bound(l_star, g_T, N, gamma):
    """Small-loss bound ``2 gamma sqrt(L* G_T ln N) + 7 gamma^2 G_T ln N``."""
    if min(l_star, g_T, gamma) < 0 or N < 2:
        raise ValueError("inputs must be nonnegative and N >= 2")
    log_n = math.log(N)
    return 2.0 * gamma * math.sqrt(l_star * g_T * log_n) + 7.0 * gamma * gamma * g_T * log_n
