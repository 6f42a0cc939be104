"""Bootstrap draw constructions and empirical critical values.

Three second-order resampling statistics are provided: the plain difference
draw (exposed deliberately, because its failure under a vanishing first-order
term is demonstrable and demonstrated in the tests), the corrected draw for
the smooth squared-mean case, and the modified draw that composes an
estimated second-order derivative with the bootstrap direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .derivative import (
    DerivEstimator,
    _check_model_pair,
    minimize_direction_ball,
    numerical_deriv,
    perturbed_model,
)
from .moments import QuadMomentModel, _vec_outer_rows
from .resampling import BootstrapScheme, resample_indices
from .sphereopt import IdentifiedSetEstimate, minimize_on_sphere
from .validation import ValidationError, check_alpha, check_int

__all__ = [
    "BootstrapScheme",
    "resample_indices",
    "BootstrapDraws",
    "standard_second_order_draw",
    "babu_corrected_draw_squared_mean",
    "modified_draw_ch",
    "modified_draws_ch",
    "critical_value",
]


@dataclass(frozen=True)
class BootstrapDraws:
    """Sorted bootstrap statistic replicates plus the scheme that made them."""

    values: np.ndarray
    scheme: BootstrapScheme
    b: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 1:
            raise ValidationError("values must be a nonempty 1-d array")
        if np.any(np.diff(vals) < 0.0):
            raise ValidationError("values must be sorted ascending")
        if self.b != vals.size:
            raise ValidationError(f"b={self.b} does not match {vals.size} values")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values, scheme: BootstrapScheme) -> "BootstrapDraws":
        vals = np.sort(np.asarray(values, dtype=float))
        return cls(values=vals, scheme=scheme, b=vals.size)


def standard_second_order_draw(phi_star: float, phi_hat: float, r_sq: float) -> float:
    """Plain second-order bootstrap difference r_n^2 (phi* - phi_hat)."""
    return float(r_sq) * (float(phi_star) - float(phi_hat))


def babu_corrected_draw_squared_mean(theta_star: float, theta_hat: float, n: int) -> float:
    """Corrected draw for phi(t) = t^2: subtracting the first-order term
    2 theta_hat (theta* - theta_hat) collapses the draw to n (theta* - theta_hat)^2."""
    diff = float(theta_star) - float(theta_hat)
    return float(n) * (diff * diff)


def modified_draws_ch(
    model: QuadMomentModel,
    model_stars,
    gamma_set: IdentifiedSetEstimate | None,
    est: DerivEstimator,
    inner_starts: int = 6,
) -> tuple[np.ndarray, int]:
    """Modified draws for a batch of bootstrap refits.

    Each draw applies the derivative estimator to the direction
    sqrt(T) (G* - G) vec(gamma gamma').  Returns (values, n_unconverged)
    where the count reports draws whose winning inner minimization stopped
    at its iteration cap instead of its tolerance.
    """
    stars = list(model_stars)
    if not stars:
        raise ValidationError("model_stars must be nonempty")
    for star in stars:
        _check_model_pair(model, star)
    if est.kind == "structural_ch":
        if gamma_set is None or len(gamma_set) == 0:
            raise ValidationError("structural draws need a nonempty gamma_set")
        # the direction is even in gamma, so each antipodal pair poses the
        # same inner problem; solving one per pair halves the batch exactly
        reps = _drop_antipodes(gamma_set.points)
        vec_reps = _vec_outer_rows(reps)  # (R, k^2)
        scale = math.sqrt(model.sample_size)
        diffs = np.stack([star.g_mat - model.g_mat for star in stars])  # (B, m, k^2)
        directions = scale * (diffs @ vec_reps.T).transpose(0, 2, 1)  # (B, R, m)
        flat = directions.reshape(-1, model.m)
        values, converged = minimize_direction_ball(
            model, flat, est.effective_radius, inner_starts=inner_starts, tol=1e-9
        )
        values = values.reshape(len(stars), reps.shape[0])
        converged = converged.reshape(len(stars), reps.shape[0])
        pick = values.argmin(axis=1)
        rows = np.arange(len(stars))
        return values[rows, pick], int((~converged[rows, pick]).sum())
    if est.kind == "numerical":
        base = minimize_on_sphere(model)
        phi0 = base.value
        out = np.empty(len(stars))
        unconverged = 0 if base.converged else 1
        for i, star in enumerate(stars):
            def phi_at(scale, _star=star):
                if scale == 0.0:
                    return phi0
                res = minimize_on_sphere(perturbed_model(model, _star, scale))
                return res.value

            out[i] = numerical_deriv(phi_at, est.step)
        return out, unconverged
    raise ValidationError(f"unsupported estimator kind for draws: {est.kind!r}")


def _drop_antipodes(points: np.ndarray) -> np.ndarray:
    dots = points @ points.T
    keep = np.ones(points.shape[0], dtype=bool)
    for i in range(points.shape[0]):
        if keep[i]:
            later = np.arange(i + 1, points.shape[0])
            keep[later[dots[i, later] < -(1.0 - 1e-12)]] = False
    return points[keep]


def modified_draw_ch(
    model: QuadMomentModel,
    model_star: QuadMomentModel,
    gamma_set: IdentifiedSetEstimate | None,
    est: DerivEstimator,
    inner_starts: int = 6,
) -> float:
    """Single modified bootstrap draw; see :func:`modified_draws_ch`."""
    values, _ = modified_draws_ch(model, [model_star], gamma_set, est, inner_starts=inner_starts)
    return float(values[0])


def critical_value(draws: BootstrapDraws, alpha: float) -> float:
    """Left-continuous empirical (1 - alpha) quantile of the draws.

    Returns the ceil((1 - alpha) B)-th order statistic (1-indexed), the
    smallest value whose empirical CDF reaches 1 - alpha.
    """
    alpha = check_alpha(alpha)
    b = check_int("b", draws.b, minimum=1)
    # the tiny guard keeps exact-integer targets from rounding up in floating
    # point, preserving the order-statistic convention
    rank = math.ceil((1.0 - alpha) * b - 1e-9)
    rank = min(max(rank, 1), b)
    return float(draws.values[rank - 1])
