"""Estimators for the second-order term of the criterion expansion.

Three routes are provided and cross-checked against each other in the tests:

* a structural estimator for the common-CH-feature criterion, which solves a
  quartic ball-constrained minimization at every near-minimizer
  representative;
* a generic numerical-differentiation estimator built from criterion
  evaluations at a perturbation scale;
* closed forms for the scalar examples (squared mean, one-sided moment with
  threshold selection, weighted-CDF distance) and the structural form for
  overidentification testing with an estimated Jacobian, whose inner problem
  is a ball-constrained linear least squares solved exactly through its
  secular equation.

The variants for stochastic-dominance contact sets and conditional moment
inequalities are intentionally not implemented here; their set-estimation
machinery is out of scope for this package.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._descent import ball_projector, projected_descent
from .moments import QuadMomentModel, _vec_outer_rows, theta_rows
from .sphereopt import IdentifiedSetEstimate
from .validation import (
    ValidationError,
    as_float_array,
    check_int,
    check_positive,
    check_weight_matrix,
    freeze,
)

__all__ = [
    "DerivEstimator",
    "quadratic_direction",
    "perturbed_model",
    "structural_deriv_ch",
    "numerical_deriv",
    "closed_form_deriv_squared_mean",
    "gms_deriv_moment_ineq",
    "cvm_deriv",
    "jtest_structural_deriv",
    "ball_least_squares",
]

_KINDS = (
    "structural_ch",
    "numerical",
    "closed_form_squared_mean",
    "gms_moment_ineq",
    "cvm_known",
    "jtest_structural",
)

_SCAN_DIRECTIONS = {2: 720, 3: 2400}
_SCAN_CHUNK = 512


@dataclass(frozen=True)
class DerivEstimator:
    """Tagged choice of second-order derivative estimator with its tuning.

    ``structural_ch`` needs the slack constant ``kappa`` (the search ball
    radius defaults to kappa**-0.5); ``numerical`` needs the perturbation
    ``step``.
    """

    kind: str
    kappa: float | None = None
    step: float | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.kappa is not None:
            object.__setattr__(self, "kappa", check_positive("kappa", self.kappa))
        if self.step is not None:
            object.__setattr__(self, "step", check_positive("step", self.step))
        if self.radius is not None:
            object.__setattr__(self, "radius", check_positive("radius", self.radius))
        if self.kind == "structural_ch" and self.kappa is None:
            raise ValidationError("structural_ch requires kappa")
        if self.kind == "numerical" and self.step is None:
            raise ValidationError("numerical requires step")

    @property
    def effective_radius(self) -> float:
        if self.radius is not None:
            return self.radius
        if self.kappa is None:
            raise ValidationError("no radius available: set radius or kappa")
        return self.kappa**-0.5

    @classmethod
    def structural(cls, kappa: float, radius: float | None = None) -> "DerivEstimator":
        return cls(kind="structural_ch", kappa=kappa, radius=radius)

    @classmethod
    def numerical(cls, step: float) -> "DerivEstimator":
        return cls(kind="numerical", step=step)


def quadratic_direction(model: QuadMomentModel, model_star: QuadMomentModel):
    """Bootstrap perturbation direction gamma -> sqrt(T) (G* - G) vec(gamma gamma')."""
    _check_model_pair(model, model_star)
    diff = model_star.g_mat - model.g_mat
    scale = np.sqrt(model.sample_size)

    def direction(gamma):
        g = np.asarray(gamma, dtype=float)
        return scale * (diff @ np.outer(g, g).reshape(-1))

    return direction


def perturbed_model(model: QuadMomentModel, model_star: QuadMomentModel, scale: float) -> QuadMomentModel:
    """Model whose criterion equals the original perturbed by ``scale`` times
    the bootstrap direction: its matrices are D + scale * sqrt(T) (D* - D)."""
    _check_model_pair(model, model_star)
    bump = scale * np.sqrt(model.sample_size)
    deltas = model.deltas + bump * (model_star.deltas - model.deltas)
    return QuadMomentModel.from_deltas(deltas, model.sample_size, weight=model.weight)


def _check_model_pair(model: QuadMomentModel, model_star: QuadMomentModel) -> None:
    if (model.m, model.k) != (model_star.m, model_star.k):
        raise ValidationError(
            f"models must share dimensions, got {(model.m, model.k)} and "
            f"{(model_star.m, model_star.k)}"
        )
    if model.sample_size != model_star.sample_size:
        raise ValidationError("models must share sample_size")


@lru_cache(maxsize=8)
def _direction_grid(k: int) -> np.ndarray:
    """Deterministic direction grid on the unit sphere for the ball scan."""
    n = _SCAN_DIRECTIONS.get(k)
    if n is None:
        raise ValidationError(f"ball scan supports k in {{2, 3}}, got k={k}")
    if k == 2:
        # the map w -> vec(w w') is even, so half the circle suffices
        angles = np.pi * np.arange(n) / n
        return freeze(np.column_stack([np.cos(angles), np.sin(angles)]))
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    golden = np.pi * (3.0 - np.sqrt(5.0))
    theta = golden * i
    pts = np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
    return freeze(pts[z > 0.0])


def minimize_direction_ball(
    model: QuadMomentModel,
    directions: np.ndarray,
    radius: float,
    inner_starts: int = 6,
    tol: float = 1e-11,
) -> tuple[np.ndarray, np.ndarray]:
    """Minimize v -> ||h + theta(v)||^2_W over the ball, batched over rows of h.

    Writing v = sqrt(t) w with ``w`` a unit direction shows the criterion is
    quadratic in t at fixed w, so the radial minimization over t in
    [0, radius^2] is closed-form.  Each problem is therefore solved by an
    exact radial scan over a dense deterministic direction grid, after which
    the ``inner_starts`` best scan candidates (thinned to distinct
    directions) are polished by projected descent in the ball.  The t = 0
    point is part of every scan line, so the result never exceeds the
    uncorrected value ||h||^2_W.

    Returns (values, converged) with one entry per row of ``directions``.
    """
    h_rows = as_float_array("directions", directions, ndim=2)
    n_prob, m = h_rows.shape
    if m != model.m:
        raise ValidationError(f"directions must have {model.m} columns, got {m}")
    radius = check_positive("radius", radius)
    inner_starts = check_int("inner_starts", inner_starts, minimum=1)
    k = model.k
    weight = model.weight
    g_flat = model.g_mat

    w_grid = _direction_grid(k)
    n_w = w_grid.shape[0]
    u_one = _vec_outer_rows(w_grid) @ g_flat.T  # (n_w, m): theta at v = w
    a_mat = u_one @ weight
    curv = (u_one * a_mat).sum(axis=1)  # u' W u >= 0
    r_sq = radius * radius
    h_w = h_rows @ weight
    h_quad = (h_w * h_rows).sum(axis=1)

    # thinning threshold: candidates closer than a few grid spacings are the
    # same well
    spacing = np.pi / n_w if k == 2 else np.sqrt(2.0 * np.pi / n_w)
    thin_cos = np.cos(min(np.pi / 2.0, 4.0 * spacing))

    start_v = np.empty((n_prob * inner_starts, k))
    start_owner = np.empty(n_prob * inner_starts, dtype=np.intp)
    n_starts_total = 0
    scan_best = np.empty(n_prob)
    top = 4 * inner_starts
    for lo in range(0, n_prob, _SCAN_CHUNK):
        hi = min(lo + _SCAN_CHUNK, n_prob)
        cross = h_w[lo:hi] @ u_one.T  # (chunk, n_w): h' W u
        with np.errstate(divide="ignore", invalid="ignore"):
            t_star = np.clip(-cross / curv[None, :], 0.0, r_sq)
        t_star[:, curv <= 0.0] = 0.0
        vals = h_quad[lo:hi, None] + t_star * (2.0 * cross + t_star * curv[None, :])
        scan_best[lo:hi] = vals.min(axis=1)
        order = np.argpartition(vals, min(top, n_w - 1), axis=1)[:, :top]
        for row in range(hi - lo):
            cols = order[row][np.argsort(vals[row, order[row]], kind="stable")]
            chosen: list[int] = []
            for col in cols:
                w_vec = w_grid[col]
                if chosen and np.max(np.abs(w_grid[chosen] @ w_vec)) >= thin_cos:
                    continue
                chosen.append(col)
                start_v[n_starts_total] = np.sqrt(t_star[row, col]) * w_vec
                start_owner[n_starts_total] = lo + row
                n_starts_total += 1
                if len(chosen) == inner_starts:
                    break

    start_v = start_v[:n_starts_total]
    owner = start_owner[:n_starts_total]

    def value(points, rows):
        resid = h_rows[owner[rows]] + theta_rows(model, points)
        return ((resid @ weight) * resid).sum(axis=1)

    def grad(points, rows):
        resid = h_rows[owner[rows]] + theta_rows(model, points)
        mats = ((resid @ weight) @ g_flat).reshape(points.shape[0], k, k)
        return 4.0 * (mats @ points[:, :, None])[:, :, 0]

    _, vals, conv = projected_descent(
        value, grad, ball_projector(radius), start_v, tol=tol
    )
    values = np.minimum(scan_best, _group_min(vals, owner, n_prob))
    converged = _group_all(conv, owner, n_prob)
    return values, converged


def _group_min(values: np.ndarray, owner: np.ndarray, n_groups: int) -> np.ndarray:
    out = np.full(n_groups, np.inf)
    np.minimum.at(out, owner, values)
    return out


def _group_all(flags: np.ndarray, owner: np.ndarray, n_groups: int) -> np.ndarray:
    out = np.ones(n_groups, dtype=bool)
    np.logical_and.at(out, owner, flags)
    return out


def structural_deriv_ch(
    model: QuadMomentModel,
    gamma_set: IdentifiedSetEstimate,
    est: DerivEstimator,
    h,
    inner_starts: int = 6,
) -> float:
    """Structural second-order derivative estimate for the CH criterion:
    the minimum over near-minimizer representatives gamma of
    min_{||v|| <= radius} ||h(gamma) + G vec(v v')||^2_W.

    ``h`` maps a unit vector to an m-vector (scalars are accepted for m=1).
    """
    if est.kind != "structural_ch":
        raise ValidationError(f"estimator kind must be structural_ch, got {est.kind!r}")
    points = np.asarray(gamma_set.points, dtype=float)
    if points.size == 0:
        raise ValidationError("gamma_set has no representatives")
    h_rows = np.empty((points.shape[0], model.m))
    for i, point in enumerate(points):
        h_rows[i] = np.atleast_1d(np.asarray(h(point), dtype=float))
    values, _ = minimize_direction_ball(
        model, h_rows, est.effective_radius, inner_starts=inner_starts
    )
    return float(values.min())


def numerical_deriv(phi_at, step: float) -> float:
    """Second-order difference quotient (phi_at(step) - phi_at(0)) / step**2.

    ``phi_at`` evaluates the criterion at the given perturbation scale along
    a fixed direction; phi_at(0) is the unperturbed value.
    """
    step = check_positive("step", step)
    return (float(phi_at(step)) - float(phi_at(0.0))) / (step * step)


def closed_form_deriv_squared_mean(h: float) -> float:
    """Known second-order derivative of the squared-mean map: h**2."""
    h = float(h)
    return h * h


def gms_deriv_moment_ineq(xbar: float, kappa_n: float, h: float) -> float:
    """Moment-inequality derivative with data-driven branch selection.

    Returns h**2 when the sample mean is clearly positive (xbar > kappa_n),
    max(h, 0)**2 in the boundary band |xbar| <= kappa_n, and 0 when the
    constraint is slack (xbar < -kappa_n).
    """
    kappa_n = check_positive("kappa_n", kappa_n)
    xbar = float(xbar)
    h = float(h)
    if xbar > kappa_n:
        return h * h
    if xbar < -kappa_n:
        return 0.0
    return max(h, 0.0) ** 2


def cvm_deriv(h, f0_weights) -> float:
    """Weighted sum of h**2 over a grid carrying probability weights."""
    h_vals = as_float_array("h", h, ndim=1)
    w = as_float_array("f0_weights", f0_weights, ndim=1)
    if w.shape != h_vals.shape:
        raise ValidationError(f"h and f0_weights must match, got {h_vals.shape} and {w.shape}")
    if np.any(w < 0.0):
        raise ValidationError("f0_weights must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-8:
        raise ValidationError(f"f0_weights must sum to 1, got {w.sum()!r}")
    return float(np.sum(w * h_vals * h_vals))


def jtest_structural_deriv(
    gamma_hat_set,
    jac_hat,
    weight,
    radius: float,
    h,
) -> float:
    """Structural derivative estimate for overidentification testing:
    min over estimated-set points of the exactly solved ball-constrained
    linear least squares min_{||v|| <= radius} (h - J v)' W (h - J v).
    """
    points = list(gamma_hat_set)
    if not points:
        raise ValidationError("gamma_hat_set must be nonempty")
    radius = check_positive("radius", radius)
    best = np.inf
    w_half = None
    for point in points:
        jac = as_float_array("jac_hat(gamma)", jac_hat(point), ndim=2)
        hv = np.atleast_1d(as_float_array("h(gamma)", np.asarray(h(point), dtype=float)))
        if w_half is None:
            w = check_weight_matrix(weight, jac.shape[0])
            vals, vecs = np.linalg.eigh(w)
            w_half = (vecs * np.sqrt(vals)) @ vecs.T
        a_mat = w_half @ jac
        b_vec = w_half @ hv
        v = ball_least_squares(a_mat, b_vec, radius)
        resid = b_vec - a_mat @ v
        best = min(best, float(resid @ resid))
    return best


def ball_least_squares(a_mat: np.ndarray, b_vec: np.ndarray, radius: float) -> np.ndarray:
    """Solve min ||A v - b|| subject to ||v|| <= radius, exactly.

    Uses the SVD of A: if the minimum-norm unconstrained solution fits the
    ball it is returned (this covers singular A); otherwise the Lagrange
    multiplier of the active ball constraint solves the secular equation
    sum_i (s_i c_i / (s_i^2 + lam))^2 = radius^2, located here by bisection
    on the monotone norm function.
    """
    a_mat = as_float_array("a_mat", a_mat, ndim=2)
    b_vec = as_float_array("b_vec", b_vec, ndim=1)
    radius = check_positive("radius", radius)
    u_mat, sing, vt_mat = np.linalg.svd(a_mat, full_matrices=False)
    coef = u_mat.T @ b_vec
    tol = max(a_mat.shape) * np.finfo(float).eps * (sing[0] if sing.size else 0.0)
    keep = sing > tol
    ratios = np.zeros_like(sing)
    ratios[keep] = coef[keep] / sing[keep]
    v0 = vt_mat.T @ ratios
    if np.linalg.norm(v0) <= radius:
        return v0

    sc = sing * coef

    def norm_at(lam: float) -> float:
        return float(np.linalg.norm(sc / (sing * sing + lam)))

    lo, hi = 0.0, 1.0
    while norm_at(hi) > radius:
        hi *= 2.0
        if hi > 1e300:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if norm_at(mid) > radius:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return vt_mat.T @ (sc / (sing * sing + lam))
