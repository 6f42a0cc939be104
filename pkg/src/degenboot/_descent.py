"""Batched spectral projected-gradient descent with Armijo backtracking.

One generic loop drives the constrained minimizations in the package
(quartic criteria over the unit sphere, over a Euclidean ball, and over
geodesic caps during set refinement).  Steps are initialized with the
Barzilai-Borwein spectral rule, which handles the long shallow valleys these
criteria develop near flat minimizer sets, and safeguarded by a monotone
line search.  All rows of a batch advance together; rows are retired from
the working set once their accepted decrease stalls.
"""

from __future__ import annotations

import numpy as np

_ARMIJO = 1e-4
_SHRINK = 0.5
_GROW = 2.0
_MAX_BACKTRACKS = 45
_BB_MIN = 1e-12
_BB_MAX = 1e10
_MEMORY = 8  # nonmonotone line-search window


def projected_descent(
    value_fn,
    grad_fn,
    project_fn,
    x0: np.ndarray,
    *,
    tol: float = 1e-12,
    max_iter: int = 500,
    patience: int = 6,
):
    """Minimize row-wise over the constraint set given by ``project_fn``.

    Parameters
    ----------
    value_fn, grad_fn : callables mapping ((n, d) points, row-index array)
        to (n,) values and (n, d) gradients; the indices identify rows of the
        original batch, for objectives and projections with per-row data.
    project_fn : callable mapping ((n, d) points, row-index array) onto the
        feasible set.
    x0 : (n, d) start points (projected before use).
    tol : relative stalling tolerance on the improvement of the best value.
    max_iter : iteration cap; rows hitting it are reported unconverged.
    patience : consecutive stalled iterations before a row retires.  The
        line search itself is nonmonotone (spectral steps overshoot), so
        stopping keys off the monotone best-so-far value instead.

    Returns
    -------
    x : (n, d) best points visited
    f : (n,) best values visited
    converged : (n,) bool
    """
    n = x0.shape[0]
    all_rows = np.arange(n)
    x = project_fn(np.array(x0, dtype=float), all_rows)
    f = value_fn(x, all_rows)
    g = grad_fn(x, all_rows)
    steps = 1.0 / np.maximum(1.0, np.linalg.norm(g, axis=1))
    prev_x = np.full_like(x, np.nan)
    prev_g = np.full_like(x, np.nan)
    # rolling window of recent values for the nonmonotone acceptance rule
    history = np.repeat(f[:, None], _MEMORY, axis=1)
    hist_pos = np.zeros(n, dtype=np.intp)
    stall = np.zeros(n, dtype=np.intp)
    converged = np.zeros(n, dtype=bool)
    best_x = x.copy()
    best_f = f.copy()

    for _ in range(max_iter):
        active = np.where(~converged)[0]
        if active.size == 0:
            break
        xa = x[active]
        fa = f[active]
        ga = grad_fn(xa, active)

        # Barzilai-Borwein spectral step where secant information exists
        sa = steps[active] * _GROW
        dx = xa - prev_x[active]
        dg = ga - prev_g[active]
        num = (dx * dx).sum(axis=1)
        den = (dx * dg).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            bb = num / den
        usable = np.isfinite(bb) & (den > 0.0) & (num > 0.0)
        sa[usable] = np.clip(bb[usable], _BB_MIN, _BB_MAX)
        prev_x[active] = xa
        prev_g[active] = ga

        f_ref = history[active].max(axis=1)
        accepted = np.zeros(active.size, dtype=bool)
        frozen = np.zeros(active.size, dtype=bool)
        new_x = xa.copy()
        new_f = fa.copy()
        for _bt in range(_MAX_BACKTRACKS):
            todo = np.where(~accepted & ~frozen)[0]
            if todo.size == 0:
                break
            cand = project_fn(xa[todo] - sa[todo, None] * ga[todo], active[todo])
            fc = value_fn(cand, active[todo])
            move = cand - xa[todo]
            move2 = (move * move).sum(axis=1)
            suff = f_ref[todo] - fc >= _ARMIJO * move2 / np.maximum(sa[todo], 1e-300)
            stuck = move2 == 0.0
            ok = suff & ~stuck
            accepted[todo[ok]] = True
            new_x[todo[ok]] = cand[ok]
            new_f[todo[ok]] = fc[ok]
            frozen[todo[stuck]] = True
            sa[todo[~ok & ~stuck]] *= _SHRINK
        frozen |= ~accepted

        gain = best_f[active] - new_f
        small = gain <= tol * np.maximum(1.0, np.abs(best_f[active]))
        stall_a = np.where(small, stall[active] + 1, 0)
        stall[active] = stall_a
        done_now = frozen | (stall_a >= patience)

        x[active] = new_x
        f[active] = new_f
        steps[active] = sa
        improved = new_f < best_f[active]
        rows_imp = active[improved]
        best_x[rows_imp] = new_x[improved]
        best_f[rows_imp] = new_f[improved]
        pos = (hist_pos[active] + 1) % _MEMORY
        history[active, pos] = new_f
        hist_pos[active] = pos
        converged[active[done_now]] = True

    return best_x, best_f, converged


def normalize_rows(x: np.ndarray, rows=None) -> np.ndarray:
    """Project rows onto the unit sphere; zero rows map to the first axis."""
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    out = np.divide(x, norms, out=np.zeros_like(x), where=norms > 1e-300)
    dead = norms[:, 0] <= 1e-300
    if dead.any():
        out[dead, 0] = 1.0
    return out


def ball_projector(radius: float):
    """Row-wise projection onto the closed ball of the given radius."""

    def project(x: np.ndarray, rows=None) -> np.ndarray:
        norms = np.linalg.norm(x, axis=1, keepdims=True)
        factor = np.minimum(1.0, radius / np.maximum(norms, 1e-300))
        return x * factor

    return project


def capped_sphere_projector(centers: np.ndarray, cap_angle: float):
    """Projection onto the sphere restricted to a geodesic cap per row.

    ``centers`` holds one unit vector per batch row; points are normalized
    and, if farther than ``cap_angle`` from their row's center, pulled back
    to the cap boundary along the great circle.  Used to keep local
    refinement of a grid point inside its own neighborhood.
    """
    cos_cap = float(np.cos(cap_angle))
    sin_cap = float(np.sin(cap_angle))

    def project(x: np.ndarray, rows) -> np.ndarray:
        out = normalize_rows(x)
        ctr = centers[rows]
        dots = (out * ctr).sum(axis=1)
        outside = dots < cos_cap
        if np.any(outside):
            sub = out[outside]
            sub_ctr = ctr[outside]
            sub_dots = dots[outside, None]
            tangent = sub - sub_dots * sub_ctr
            tnorm = np.linalg.norm(tangent, axis=1, keepdims=True)
            safe = tnorm[:, 0] > 1e-300
            pulled = sub_ctr.copy()
            pulled[safe] = cos_cap * sub_ctr[safe] + sin_cap * tangent[safe] / tnorm[safe]
            out[np.where(outside)[0]] = pulled
        return out

    return project
