"""Minimization of the weighted moment criterion over the unit sphere and
estimation of the near-minimizer set.

The criterion gamma -> theta(gamma)' W theta(gamma) is a smooth quartic on
the sphere, so projected-gradient descent from a deterministic multistart
point set (plus the best point of a coarse scan grid) finds the global
minimum cheaply in the low dimensions the package targets.  A brute-force
angular grid serves as an independent oracle for cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._descent import capped_sphere_projector, normalize_rows, projected_descent
from .moments import QuadMomentModel, eval_phi, phi_rows, theta_rows
from .validation import ValidationError, check_int, check_positive, freeze

__all__ = [
    "SphereMinResult",
    "IdentifiedSetEstimate",
    "sphere_point_set",
    "minimize_on_sphere",
    "grid_oracle_sphere",
    "estimate_identified_set",
]

_SCAN_RESOLUTION = {2: 512, 3: 1024}
_SET_RESOLUTION = {2: 240, 3: 600}
_CHUNK = 1 << 18
# fixed key so the k >= 4 fallback point set is deterministic
_POINT_SET_KEY = (0x9E3779B97F4A7C15, 0xD1B54A32D192ED03)


@dataclass(frozen=True)
class SphereMinResult:
    """Outcome of a sphere minimization."""

    minimizer: np.ndarray
    value: float
    starts_used: int
    converged: bool

    def __post_init__(self):
        object.__setattr__(self, "minimizer", freeze(self.minimizer))


@dataclass(frozen=True)
class IdentifiedSetEstimate:
    """Cluster representatives of the near-minimizer set on the sphere.

    ``points`` holds one row per representative, is closed under sign flips,
    and always contains the global minimizer.  ``threshold`` is the slack
    kappa**2 applied on top of the minimized criterion ``phi_min``.
    """

    points: np.ndarray
    threshold: float
    phi_min: float

    def __post_init__(self):
        object.__setattr__(self, "points", freeze(self.points))

    def __len__(self) -> int:
        return self.points.shape[0]


@lru_cache(maxsize=16)
def _cached_point_set(k: int, n: int) -> np.ndarray:
    if k == 2:
        angles = 2.0 * np.pi * np.arange(n) / n
        pts = np.column_stack([np.cos(angles), np.sin(angles)])
    elif k == 3:
        i = np.arange(n) + 0.5
        z = 1.0 - 2.0 * i / n
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        golden = np.pi * (3.0 - np.sqrt(5.0))
        theta = golden * i
        pts = np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
    else:
        rng = np.random.Generator(np.random.Philox(key=np.array(_POINT_SET_KEY, dtype=np.uint64)))
        pts = normalize_rows(rng.standard_normal((n, k)))
    return freeze(pts)


def sphere_point_set(k: int, n: int) -> np.ndarray:
    """Deterministic, well-spread points on the unit sphere in R^k.

    Uniform angles for k=2, a Fibonacci lattice for k=3, and a fixed-seed
    normalized Gaussian cloud for higher dimensions.
    """
    k = check_int("k", k, minimum=2)
    n = check_int("n", n, minimum=1)
    return _cached_point_set(k, n)


def _criterion_closures(model: QuadMomentModel):
    g_flat = model.g_mat  # (m, k*k), row j = vec(D_j)
    weight = model.weight
    k = model.k

    def value(points, _rows):
        th = theta_rows(model, points)
        return ((th @ weight) * th).sum(axis=1)

    def grad(points, _rows):
        th = theta_rows(model, points)
        wth = th @ weight
        mats = (wth @ g_flat).reshape(points.shape[0], k, k)
        return 4.0 * (mats @ points[:, :, None])[:, :, 0]

    return value, grad


def _phi_on_grid(model: QuadMomentModel, grid: np.ndarray) -> np.ndarray:
    out = np.empty(grid.shape[0])
    for lo in range(0, grid.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, grid.shape[0])
        out[lo:hi] = phi_rows(model, grid[lo:hi])
    return out


def _lexicographic_first(points: np.ndarray) -> int:
    order = np.lexsort(points.T[::-1])
    return int(order[0])


def minimize_on_sphere(
    model: QuadMomentModel,
    n_starts: int = 121,
    tol: float = 1e-12,
) -> SphereMinResult:
    """Minimize the weighted criterion over the unit sphere.

    Runs projected-gradient descent with backtracking from ``n_starts``
    deterministic starts: a well-spread point set plus the best point of a
    coarse scan grid.  Among (numerically) tied minima the lexicographically
    smallest coordinate vector is reported, so repeated calls are stable.
    Non-convergence is reported through the flag, never raised.
    """
    n_starts = check_int("n_starts", n_starts, minimum=1)
    tol = check_positive("tol", tol)
    k = model.k

    pieces = [sphere_point_set(k, max(1, n_starts - 1))[: max(0, n_starts - 1)]]
    if k in _SCAN_RESOLUTION:
        grid = sphere_point_set(k, _SCAN_RESOLUTION[k])
        vals = _phi_on_grid(model, grid)
        pieces.append(grid[int(np.argmin(vals))][None, :])
    else:
        pieces.append(sphere_point_set(k, n_starts)[-1:])
    starts = np.vstack(pieces)

    value_fn, grad_fn = _criterion_closures(model)
    points, values, converged = projected_descent(
        value_fn, grad_fn, normalize_rows, starts, tol=tol
    )

    best = float(values.min())
    tie = np.where(values <= best + 1e-12 * max(1.0, abs(best)))[0]
    pick = tie[_lexicographic_first(points[tie])]
    minimizer = points[pick] / np.linalg.norm(points[pick])
    return SphereMinResult(
        minimizer=minimizer,
        value=eval_phi(model, minimizer),
        starts_used=starts.shape[0],
        converged=bool(converged[pick]),
    )


def grid_oracle_sphere(model: QuadMomentModel, resolution: int) -> SphereMinResult:
    """Brute-force minimum over an angular grid (verification oracle).

    Only k in {2, 3} is supported: uniform angles on the circle, Fibonacci
    lattice on the 2-sphere.
    """
    resolution = check_int("resolution", resolution, minimum=100)
    if model.k not in (2, 3):
        raise ValidationError(f"grid oracle supports k in {{2, 3}}, got k={model.k}")
    grid = sphere_point_set(model.k, resolution)
    vals = _phi_on_grid(model, grid)
    pick = int(np.argmin(vals))
    return SphereMinResult(
        minimizer=grid[pick],
        value=eval_phi(model, grid[pick]),
        starts_used=resolution,
        converged=True,
    )


def _grid_spacing(k: int, resolution: int) -> float:
    if k == 2:
        return 2.0 * np.pi / resolution
    return math.sqrt(4.0 * np.pi / resolution)


def estimate_identified_set(
    model: QuadMomentModel,
    kappa: float,
    resolution: int | None = None,
) -> IdentifiedSetEstimate:
    """Estimate the set of near-minimizers with slack kappa**2.

    Scans the oracle grid for points whose criterion exceeds the global
    minimum by at most kappa**2, refines each by local descent (confined to
    a one-grid-spacing geodesic cap around its grid point, so polishing
    cannot migrate across a flat stretch of near-minimizers), and merges
    refined points within angular distance 2 * (grid spacing); the global
    minimizer and all sign flips are always included.  Subtracting the
    minimized criterion inside the slack keeps the set nonempty even far
    from the null.
    """
    kappa = check_positive("kappa", kappa)
    k = model.k
    if k not in _SET_RESOLUTION:
        raise ValidationError(f"identified-set estimation supports k in {{2, 3}}, got k={k}")
    resolution = check_int(
        "resolution", resolution if resolution is not None else _SET_RESOLUTION[k], minimum=100
    )

    best = minimize_on_sphere(model)
    grid = sphere_point_set(k, resolution)
    grid_vals = _phi_on_grid(model, grid)
    threshold = best.value + kappa * kappa
    passing = np.where(grid_vals <= threshold)[0]

    value_fn, grad_fn = _criterion_closures(model)
    spacing = _grid_spacing(k, resolution)
    if passing.size:
        refined, _, _ = projected_descent(
            value_fn,
            grad_fn,
            capped_sphere_projector(grid[passing], spacing),
            grid[passing],
            tol=1e-12,
        )
    else:
        refined = np.empty((0, k))

    # candidates ordered by pre-refinement criterion so that enlarging kappa
    # only appends candidates; the greedy merge below then never drops a
    # representative that a smaller kappa kept
    cand_points = np.vstack([best.minimizer[None, :], refined])
    cand_keys = np.concatenate([[-np.inf], grid_vals[passing]])
    cand_grid = np.vstack([best.minimizer[None, :], grid[passing]])
    order = np.lexsort((*[cand_grid[:, j] for j in range(k - 1, -1, -1)], cand_keys))

    # the criterion is even, so clusters are merged up to sign (|dot|) and
    # each cluster is emitted as an antipodal pair, making the sign symmetry
    # of the estimate exact by construction
    merge_cos = math.cos(min(np.pi / 2.0, 2.0 * spacing))
    kept: list[np.ndarray] = []
    for idx in order:
        point = cand_points[idx]
        if kept and float(np.max(np.abs(np.asarray(kept) @ point))) >= merge_cos:
            continue
        kept.append(point)

    stack = np.vstack([np.asarray(kept), -np.asarray(kept)])
    stack = stack[np.lexsort(stack.T[::-1])]
    return IdentifiedSetEstimate(points=stack, threshold=kappa * kappa, phi_min=best.value)
