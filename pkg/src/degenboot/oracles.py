"""Brute-force cross-checks used by the test suite and the `oracle` CLI
subcommand.

Each check pits a fast code path against an independent, definition-level
computation: sphere minimization against an exhaustive angular grid, the
quadratic-form moment representation against direct summation over the
sample, and the structural derivative estimator against a dense polar grid
over the search ball.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._descent import normalize_rows, projected_descent
from .derivative import DerivEstimator, structural_deriv_ch
from .moments import QuadMomentModel, eval_theta, fit_quadratic_moments
from .simulate import PanelData
from .sphereopt import (
    IdentifiedSetEstimate,
    _criterion_closures,
    grid_oracle_sphere,
    minimize_on_sphere,
)
from .validation import ValidationError, check_int

__all__ = [
    "OracleReport",
    "check_sphere_minimization",
    "check_representation_identity",
    "check_structural_derivative",
    "random_model",
    "random_panel",
    "brute_force_direction_ball",
]


@dataclass(frozen=True)
class OracleReport:
    name: str
    trials: int
    failures: tuple[str, ...]
    worst: float

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        lines = [f"{self.name}: {status} ({self.trials} trials, worst discrepancy {self.worst:.3e})"]
        lines.extend(f"  {f}" for f in self.failures)
        return "\n".join(lines)


def random_model(rng: np.random.Generator, k: int = 2, m: int | None = None) -> QuadMomentModel:
    """Random symmetric quadratic-form model with unit-scale entries."""
    m = m if m is not None else k
    raw = rng.standard_normal((m, k, k))
    deltas = 0.5 * (raw + raw.transpose(0, 2, 1))
    return QuadMomentModel.from_deltas(deltas, sample_size=100)


def random_panel(rng: np.random.Generator, t: int = 50, k: int = 2, m: int = 2) -> PanelData:
    return PanelData(y=rng.standard_normal((t, k)), z=rng.standard_normal((t, m)))


def _polish(model: QuadMomentModel, point: np.ndarray) -> float:
    value_fn, grad_fn = _criterion_closures(model)
    _, values, _ = projected_descent(
        value_fn, grad_fn, normalize_rows, point[None, :], tol=1e-14
    )
    return float(values[0])


def check_sphere_minimization(
    trials: int = 100,
    seed: int = 0,
    k: int = 2,
    resolution: int = 100000,
    rel_tol: float = 1e-6,
) -> OracleReport:
    """Multistart descent vs. exhaustive grid.

    Two assertions per trial: descent never exceeds the raw grid minimum
    (beyond 1e-9), and descent agrees with the grid minimum polished by a
    single local refinement to within ``rel_tol`` relative error.
    """
    trials = check_int("trials", trials, minimum=1)
    rng = np.random.default_rng(seed)
    failures = []
    worst = 0.0
    for trial in range(trials):
        model = random_model(rng, k=k)
        desc = minimize_on_sphere(model)
        grid = grid_oracle_sphere(model, resolution)
        scale = max(1.0, abs(grid.value))
        overshoot = (desc.value - grid.value) / scale
        polished = _polish(model, grid.minimizer)
        gap = abs(desc.value - polished) / max(1.0, abs(polished))
        worst = max(worst, overshoot, gap)
        if overshoot > 1e-9:
            failures.append(f"trial {trial}: descent above grid minimum by {overshoot:.3e}")
        if gap > rel_tol:
            failures.append(f"trial {trial}: descent vs polished grid gap {gap:.3e}")
    return OracleReport("sphere", trials, tuple(failures), worst)


def direct_theta(panel: PanelData, gamma: np.ndarray) -> np.ndarray:
    """Definition-level moment function: a pass over the sample rows."""
    proj = panel.y @ gamma
    sq = proj * proj
    centered = sq - sq.mean()
    return panel.z.T @ centered / panel.sample_size


def check_representation_identity(
    trials: int = 50,
    seed: int = 0,
    tol: float = 1e-10,
    n_gammas: int = 100,
    model_factory=None,
) -> OracleReport:
    """Quadratic-form evaluation vs. direct summation at random unit vectors.

    ``model_factory(panel)`` may supply the model under test, which lets a
    deliberately corrupted model demonstrate the failure report.
    """
    trials = check_int("trials", trials, minimum=1)
    rng = np.random.default_rng(seed)
    factory = model_factory if model_factory is not None else fit_quadratic_moments
    failures = []
    worst = 0.0
    for trial in range(trials):
        k = 2 + trial % 2
        panel = random_panel(rng, t=50, k=k, m=k)
        model = factory(panel)
        gammas = normalize_rows(rng.standard_normal((n_gammas, k)))
        for gamma in gammas:
            err = float(np.max(np.abs(eval_theta(model, gamma) - direct_theta(panel, gamma))))
            worst = max(worst, err)
            if err > tol:
                failures.append(
                    f"trial {trial}: representation mismatch {err:.3e} at gamma={gamma.tolist()}"
                )
                break
    return OracleReport("representation", trials, tuple(failures), worst)


def brute_force_direction_ball(
    model: QuadMomentModel,
    h_row: np.ndarray,
    radius: float,
    n_radial: int = 700,
    n_angular: int = 2600,
) -> float:
    """Dense polar-grid minimum of v -> ||h + theta(v)||^2_W over the ball (k=2)."""
    if model.k != 2:
        raise ValidationError("brute force ball grid is built for k=2 only")
    radii = np.linspace(0.0, radius, n_radial)
    angles = np.linspace(0.0, 2.0 * np.pi, n_angular, endpoint=False)
    cos_a, sin_a = np.cos(angles), np.sin(angles)
    best = np.inf
    weight = model.weight
    for lo in range(0, n_radial, 64):
        rr = radii[lo : lo + 64]
        pts = np.empty((rr.size * n_angular, 2))
        pts[:, 0] = (rr[:, None] * cos_a[None, :]).reshape(-1)
        pts[:, 1] = (rr[:, None] * sin_a[None, :]).reshape(-1)
        vecs = (pts[:, :, None] * pts[:, None, :]).reshape(pts.shape[0], -1)
        resid = vecs @ model.g_mat.T + h_row[None, :]
        vals = ((resid @ weight) * resid).sum(axis=1)
        best = min(best, float(vals.min()))
    return best


def check_structural_derivative(
    trials: int = 25,
    seed: int = 0,
    rel_tol: float = 1e-4,
) -> OracleReport:
    """Structural derivative estimate vs. dense (representative x ball-grid)
    brute force on random k=2 problems."""
    trials = check_int("trials", trials, minimum=1)
    rng = np.random.default_rng(seed)
    failures = []
    worst = 0.0
    for trial in range(trials):
        m = 1 + trial % 2
        model = random_model(rng, k=2, m=m)
        n_reps = 1 + trial % 3
        reps = normalize_rows(rng.standard_normal((n_reps, 2)))
        gamma_set = IdentifiedSetEstimate(
            points=np.vstack([reps, -reps]), threshold=1.0, phi_min=0.0
        )
        radius = float(rng.uniform(0.5, 1.25))
        coeffs = rng.standard_normal((m, 4))

        def direction(gamma, _c=coeffs):
            return _c @ np.outer(gamma, gamma).reshape(-1)

        est = DerivEstimator(kind="structural_ch", kappa=1.0, radius=radius)
        value = structural_deriv_ch(model, gamma_set, est, direction)
        brute = min(
            brute_force_direction_ball(model, np.atleast_1d(direction(p)), radius)
            for p in gamma_set.points
        )
        scale = max(1.0, abs(brute))
        err = abs(value - brute) / scale
        overshoot = (value - brute) / scale
        worst = max(worst, err)
        if overshoot > 1e-9:
            failures.append(f"trial {trial}: estimate above brute force by {overshoot:.3e}")
        elif err > rel_tol:
            failures.append(f"trial {trial}: estimate vs brute force gap {err:.3e}")
    return OracleReport("derivative", trials, tuple(failures), worst)
