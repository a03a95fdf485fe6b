"""Exception types raised by cocolearn.

Every exception carries a short ``code`` string so harness output and CLI
messages can report the failure class without string-matching messages.
"""


class CocoError(Exception):
    """Base class for all library errors."""

    code = "coco-error"


class CCVOverflowError(CocoError, OverflowError):
    code = "ccv-overflow"


class UnnormalizedViolationError(CocoError, ValueError):
    code = "unnormalized-violation"


class BoundViolationError(CocoError, ValueError):
    code = "bound-violation"


class ScaleRegressionError(CocoError, ValueError):
    code = "scale-regression"


class GammaViolationError(CocoError, ValueError):
    code = "gamma-violation"


class UnsupportedProjectionError(CocoError, NotImplementedError):
    code = "unsupported-projection"


class CoverTooLargeError(CocoError, ValueError):
    code = "cover-too-large"

    def __init__(self, estimate, cap):
        self.estimate = estimate
        self.cap = cap
        super().__init__(
            f"cover would need about {estimate:.3g} centers (cap {cap:.3g}); "
            "increase delta or raise max_centers"
        )


class UnnormalizedOracleError(CocoError, ValueError):
    code = "unnormalized-oracle"


class InfeasibleInstanceError(CocoError, ValueError):
    code = "infeasible-instance"


class ProtocolError(CocoError, RuntimeError):
    """Raised when the act-then-reveal round protocol is broken."""

    code = "protocol-violation"


class RunAbortedError(CocoError, RuntimeError):
    """A policy-level error interrupted a run; ``round`` is the failing round."""

    code = "run-aborted"

    def __init__(self, round_index, cause):
        self.round = round_index
        self.cause = cause
        super().__init__(f"run aborted at round {round_index}: [{getattr(cause, 'code', type(cause).__name__)}] {cause}")
