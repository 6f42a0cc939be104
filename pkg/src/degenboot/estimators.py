"""scikit-learn style front ends for the hypothesis tests.

Each estimator takes its tuning in ``__init__`` (so ``get_params`` /
``set_params`` / ``clone`` work as usual), runs the test in ``fit``, and
exposes the outcome through fitted attributes (``statistic_``,
``crit_value_``, ``reject_``, ...).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .inference import ch_feature_test, moment_ineq_test, squared_mean_test
from .moments import panel_from_series
from .resampling import BootstrapScheme
from .rngtools import as_generator
from .simulate import PanelData
from .validation import ValidationError, as_float_array

__all__ = ["CommonFeatureTest", "SquaredMeanTest", "MomentInequalityTest"]


def _as_panel(X) -> PanelData:
    if isinstance(X, PanelData):
        return X
    arr = as_float_array("X", X)
    if arr.ndim != 2:
        raise ValidationError("X must be a PanelData or a 2-d series array")
    return panel_from_series(arr)


class CommonFeatureTest(BaseEstimator):
    """Bootstrap test for a common conditionally heteroskedastic feature.

    Parameters
    ----------
    kappa_rule : named shrinkage rule ("T^-1/4", "T^-1/3", "T^-2/5") or a
        bare exponent in (0, 1/2).
    estimator : "structural" or "numerical" derivative estimator.
    b : bootstrap repetitions.
    alpha : nominal level.
    scheme : "iid_multinomial" or "moving_block".
    block_len : moving-block length (defaults to ceil(T**(1/3)) at use time).
    random_state : seed or Generator for the bootstrap streams.

    ``fit`` accepts either a PanelData or a raw (T+1, k) series, in which
    case instruments default to the squared contemporaneous components.
    """

    def __init__(
        self,
        kappa_rule="T^-1/3",
        estimator="structural",
        b=200,
        alpha=0.05,
        scheme="iid_multinomial",
        block_len=None,
        n_starts=121,
        resolution=None,
        weight=None,
        random_state=None,
    ):
        self.kappa_rule = kappa_rule
        self.estimator = estimator
        self.b = b
        self.alpha = alpha
        self.scheme = scheme
        self.block_len = block_len
        self.n_starts = n_starts
        self.resolution = resolution
        self.weight = weight
        self.random_state = random_state

    def fit(self, X, y=None):
        panel = _as_panel(X)
        outcome = ch_feature_test(
            panel,
            kappa_rule=self.kappa_rule,
            est_kind=self.estimator,
            b=self.b,
            alpha=self.alpha,
            scheme=BootstrapScheme(kind=self.scheme, block_len=self.block_len),
            rng=as_generator(self.random_state),
            weight=self.weight,
            n_starts=self.n_starts,
            resolution=self.resolution,
        )
        self.outcome_ = outcome
        self.statistic_ = outcome.statistic
        self.crit_value_ = outcome.crit_value
        self.reject_ = outcome.reject
        self.minimizer_ = np.asarray(outcome.minimizer)
        self.n_features_in_ = panel.k
        return self


class SquaredMeanTest(BaseEstimator):
    """Bootstrap test of H0: (mean)^2 = null_value for a scalar sample."""

    def __init__(self, null_value=0.0, method="modified", b=200, alpha=0.05, random_state=None):
        self.null_value = null_value
        self.method = method
        self.b = b
        self.alpha = alpha
        self.random_state = random_state

    def fit(self, X, y=None):
        x = np.asarray(X, dtype=float).reshape(-1)
        outcome = squared_mean_test(
            x,
            null_value=self.null_value,
            method=self.method,
            b=self.b,
            alpha=self.alpha,
            rng=as_generator(self.random_state),
        )
        self.outcome_ = outcome
        self.statistic_ = outcome.statistic
        self.crit_value_ = outcome.crit_value
        self.reject_ = outcome.reject
        return self


class MomentInequalityTest(BaseEstimator):
    """Bootstrap test of H0: mean <= 0 for a scalar sample."""

    def __init__(self, kappa_rule="T^-1/3", b=200, alpha=0.05, random_state=None):
        self.kappa_rule = kappa_rule
        self.b = b
        self.alpha = alpha
        self.random_state = random_state

    def fit(self, X, y=None):
        x = np.asarray(X, dtype=float).reshape(-1)
        outcome = moment_ineq_test(
            x,
            kappa_rule=self.kappa_rule,
            b=self.b,
            alpha=self.alpha,
            rng=as_generator(self.random_state),
        )
        self.outcome_ = outcome
        self.statistic_ = outcome.statistic
        self.crit_value_ = outcome.crit_value
        self.reject_ = outcome.reject
        return self
