"""Supervised sparse context learning.

The compiled core lives in ``sscl._sscl``; ``SSCLClassifier`` wraps it with
arbitrary label values.
"""

import numpy as np

from ._sscl import (
    ConfigError,
    DataError,
    Ensemble,
    Hyperparams,
    SolverError,
    convergence,
    cross_validate,
    fit,
    load_csv,
    solve_box_qp,
    solve_l1_quadratic,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Ensemble",
    "Hyperparams",
    "SSCLClassifier",
    "SolverError",
    "convergence",
    "cross_validate",
    "fit",
    "load_csv",
    "make_hyperparams",
    "solve_box_qp",
    "solve_l1_quadratic",
]


def make_hyperparams(**fields):
    h = Hyperparams()
    for name, value in fields.items():
        if not hasattr(h, name):
            raise TypeError(f"unknown hyperparameter {name!r}")
        setattr(h, name, value)
    return h


class SSCLClassifier:
    """fit/predict over any hashable labels; keyword arguments are Hyperparams fields."""

    def __init__(self, **hyper):
        self.hyper = make_hyperparams(**hyper)
        self.classes_ = None
        self.model_ = None

    def fit(self, X, y):
        self.classes_, ids = np.unique(np.asarray(y), return_inverse=True)
        self.model_ = fit(np.asarray(X, dtype=float), ids.astype(int).tolist(), self.hyper)
        return self

    def predict(self, X):
        if self.model_ is None:
            raise RuntimeError("call fit first")
        ids = self.model_.predict(np.asarray(X, dtype=float))
        return self.classes_[np.asarray(ids, dtype=int)]

    def score(self, X, y):
        return float(np.mean(self.predict(X) == np.asarray(y)))
