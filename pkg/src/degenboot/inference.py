"""End-to-end hypothesis tests built from the moment, optimization,
derivative, and bootstrap layers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bootstrap import (
    BootstrapDraws,
    BootstrapScheme,
    babu_corrected_draw_squared_mean,
    critical_value,
    modified_draws_ch,
    standard_second_order_draw,
)
from .derivative import DerivEstimator, gms_deriv_moment_ineq
from .moments import bootstrap_model, fit_quadratic_moments
from .rngtools import as_generator, derive_rng, fresh_seed
from .simulate import PanelData
from .sphereopt import estimate_identified_set, minimize_on_sphere
from .tuning import kappa_from_rule, normalize_rule
from .validation import ValidationError, as_float_array, check_alpha, check_int, check_positive

__all__ = [
    "TestOutcome",
    "ch_feature_test",
    "squared_mean_test",
    "moment_ineq_test",
    "adaptive_statistic",
    "EST_KINDS",
]

EST_KINDS = ("structural", "numerical")


@dataclass(frozen=True)
class TestOutcome:
    """Result of one hypothesis test run."""

    statistic: float
    crit_value: float
    reject: bool
    alpha: float
    b: int
    tuning: dict = field(default_factory=dict)
    minimizer: np.ndarray | None = None
    draws: BootstrapDraws | None = None


def _draw_streams(rng, resample_seed):
    rng = as_generator(rng)
    if resample_seed is None:
        resample_seed = fresh_seed(rng)
    return int(resample_seed)


def ch_feature_test(
    panel: PanelData,
    kappa_rule="T^-1/3",
    est_kind: str = "structural",
    b: int = 200,
    alpha: float = 0.05,
    scheme: BootstrapScheme | None = None,
    rng=None,
    *,
    weight=None,
    n_starts: int = 121,
    resolution: int | None = None,
    inner_starts: int = 6,
    resample_seed: int | None = None,
) -> TestOutcome:
    """Test whether a common conditionally heteroskedastic feature exists.

    The statistic is T times the minimized weighted criterion; the critical
    value is the empirical (1 - alpha) quantile of modified bootstrap draws,
    each composing the chosen second-order derivative estimator (structural
    or numerical, both tuned by the kappa rule) with the refit direction of
    an iid or moving-block row resample.

    ``resample_seed`` pins the bootstrap index streams; runs sharing it (and
    b) consume identical resamples regardless of rule or estimator kind, so
    cross-tuning comparisons are paired.
    """
    if est_kind not in EST_KINDS:
        raise ValidationError(f"est_kind must be one of {EST_KINDS}, got {est_kind!r}")
    b = check_int("b", b, minimum=1)
    alpha = check_alpha(alpha)
    scheme = scheme if scheme is not None else BootstrapScheme()
    model = fit_quadratic_moments(panel, weight)
    t = model.sample_size

    sphere = minimize_on_sphere(model, n_starts=n_starts)
    statistic = t * sphere.value

    rule_label, _ = normalize_rule(kappa_rule)
    kappa = kappa_from_rule(kappa_rule, t)
    if est_kind == "structural":
        est = DerivEstimator.structural(kappa)
        gamma_set = estimate_identified_set(model, kappa, resolution=resolution)
    else:
        est = DerivEstimator.numerical(step=kappa)
        gamma_set = None

    resample_seed = _draw_streams(rng, resample_seed)
    stars = [
        bootstrap_model(panel, scheme, derive_rng(resample_seed, i)) for i in range(b)
    ]
    values, n_unconverged = modified_draws_ch(
        model, stars, gamma_set, est, inner_starts=inner_starts
    )
    draws = BootstrapDraws.from_values(values, scheme)
    crit = critical_value(draws, alpha)

    tuning = {
        "kappa_rule": rule_label,
        "kappa": kappa,
        "estimator": est_kind,
        "scheme": scheme.label(),
        "n_starts": n_starts,
        "inner_starts": inner_starts,
        "resolution": resolution,
        "gamma_set_size": None if gamma_set is None else len(gamma_set),
        "stat_converged": sphere.converged,
        "draws_unconverged": n_unconverged,
        "resample_seed": resample_seed,
    }
    return TestOutcome(
        statistic=float(statistic),
        crit_value=crit,
        reject=bool(statistic > crit),
        alpha=alpha,
        b=b,
        tuning=tuning,
        minimizer=sphere.minimizer,
        draws=draws,
    )


_SQUARED_MEAN_METHODS = ("standard", "babu", "modified")


def squared_mean_test(
    sample,
    null_value: float = 0.0,
    method: str = "modified",
    b: int = 200,
    alpha: float = 0.05,
    rng=None,
    scheme: BootstrapScheme | None = None,
    *,
    resample_seed: int | None = None,
) -> TestOutcome:
    """Test H0: (mean)^2 = null_value against larger values.

    The statistic is n (xbar^2 - null_value).  The three methods share
    resample index streams for a given seed, so their draws differ only in
    the statistic applied to each resample: the plain difference draw, the
    corrected draw, or the known-derivative composition (the latter two
    coincide identically for this map).
    """
    x = as_float_array("sample", sample, ndim=1)
    if x.size < 2:
        raise ValidationError("sample needs at least 2 observations")
    if method not in _SQUARED_MEAN_METHODS:
        raise ValidationError(f"method must be one of {_SQUARED_MEAN_METHODS}, got {method!r}")
    b = check_int("b", b, minimum=1)
    alpha = check_alpha(alpha)
    scheme = scheme if scheme is not None else BootstrapScheme()
    n = x.size
    xbar = float(x.mean())
    statistic = n * (xbar * xbar - float(null_value))

    resample_seed = _draw_streams(rng, resample_seed)
    values = np.empty(b)
    for i in range(b):
        idx = _indices(scheme, n, resample_seed, i)
        star = float(x[idx].mean())
        if method == "standard":
            values[i] = standard_second_order_draw(star * star, xbar * xbar, n)
        else:
            # the corrected draw and the known-map composition h -> h^2 applied
            # to sqrt(n)(xbar* - xbar) are the same number; computing both
            # through one expression keeps the identity exact
            values[i] = babu_corrected_draw_squared_mean(star, xbar, n)
    draws = BootstrapDraws.from_values(values, scheme)
    crit = critical_value(draws, alpha)
    tuning = {"method": method, "scheme": scheme.label(), "resample_seed": resample_seed}
    return TestOutcome(
        statistic=float(statistic),
        crit_value=crit,
        reject=bool(statistic > crit),
        alpha=alpha,
        b=b,
        tuning=tuning,
        draws=draws,
    )


def moment_ineq_test(
    sample,
    kappa_rule="T^-1/3",
    b: int = 200,
    alpha: float = 0.05,
    rng=None,
    scheme: BootstrapScheme | None = None,
    *,
    resample_seed: int | None = None,
) -> TestOutcome:
    """Test H0: mean <= 0 via the statistic n max(xbar, 0)^2.

    Bootstrap draws compose the threshold-selected derivative with
    sqrt(n)(xbar* - xbar); deep inside the constraint every draw is zero and
    the test never rejects.
    """
    x = as_float_array("sample", sample, ndim=1)
    if x.size < 2:
        raise ValidationError("sample needs at least 2 observations")
    b = check_int("b", b, minimum=1)
    alpha = check_alpha(alpha)
    scheme = scheme if scheme is not None else BootstrapScheme()
    n = x.size
    xbar = float(x.mean())
    statistic = n * max(xbar, 0.0) ** 2
    kappa_n = kappa_from_rule(kappa_rule, n)
    rule_label, _ = normalize_rule(kappa_rule)

    resample_seed = _draw_streams(rng, resample_seed)
    sqrt_n = np.sqrt(n)
    values = np.empty(b)
    for i in range(b):
        idx = _indices(scheme, n, resample_seed, i)
        star = float(x[idx].mean())
        values[i] = gms_deriv_moment_ineq(xbar, kappa_n, sqrt_n * (star - xbar))
    draws = BootstrapDraws.from_values(values, scheme)
    crit = critical_value(draws, alpha)
    tuning = {
        "kappa_rule": rule_label,
        "kappa": kappa_n,
        "scheme": scheme.label(),
        "resample_seed": resample_seed,
    }
    return TestOutcome(
        statistic=float(statistic),
        crit_value=crit,
        reject=bool(statistic > crit),
        alpha=alpha,
        b=b,
        tuning=tuning,
        draws=draws,
    )


def _indices(scheme, n, resample_seed, i):
    from .resampling import resample_indices

    return resample_indices(scheme, n, derive_rng(resample_seed, i))


def adaptive_statistic(phi_hat: float, r_n: float, kappa_n: float) -> tuple[float, str]:
    """Scale-selection between first- and second-order statistics.

    Returns (r_n * phi_hat, "first_order") when r_n * phi_hat / kappa_n > 1
    and (r_n^2 * phi_hat, "second_order") otherwise.
    """
    kappa_n = check_positive("kappa_n", kappa_n)
    r_n = check_positive("r_n", r_n)
    phi_hat = float(phi_hat)
    if r_n * phi_hat / kappa_n > 1.0:
        return r_n * phi_hat, "first_order"
    return r_n * r_n * phi_hat, "second_order"
