"""Input checks shared by the estimator wrappers."""

import numpy as np
from sklearn.utils import check_array


def check_unit_matrix(a, name, n_features=None):
    """2-d float array with entries in [0, 1] (and a fixed column count if given)."""
    a = check_array(a, dtype=np.float64, ensure_min_samples=1, input_name=name)
    if n_features is not None and a.shape[1] != n_features:
        raise ValueError(f"{name} has {a.shape[1]} columns, expected {n_features}")
    if a.min() < 0.0 or a.max() > 1.0:
        raise ValueError(f"{name} entries must lie in [0, 1]")
    return a


def check_paired(costs, violations):
    costs = check_unit_matrix(costs, "costs")
    violations = check_unit_matrix(violations, "violations", costs.shape[1])
    if costs.shape[0] != violations.shape[0]:
        raise ValueError(f"costs has {costs.shape[0]} rows but violations has {violations.shape[0]}")
    if costs.shape[1] < 2:
        raise ValueError("need at least two experts")
    return costs, violations


def check_oracle_sequence(seq, name):
    seq = list(seq)
    for i, item in enumerate(seq):
        if not callable(getattr(item, "value", None)):
            raise TypeError(f"{name}[{i}] must expose a .value(x) method")
    return seq
