"""Quadratic-form representation of the sample moment function.

For a panel of aligned rows (Z_t, Y_{t+1}) the m-vector moment function

    theta_hat(gamma) = (1/T) sum_t Z_t * ((gamma' Y_{t+1})^2 - c_hat(gamma)),
    c_hat(gamma)     = (1/T) sum_t (gamma' Y_{t+1})^2,

is exactly quadratic in gamma: its j-th component equals gamma' D_j gamma for
the centered second-moment matrices

    D_j = (1/T) sum_t Z_t^(j) Y_{t+1} Y_{t+1}' - zbar_j * (1/T) sum_t Y_{t+1} Y_{t+1}'.

Stacking vec(D_j)' row-wise into G gives theta_hat(gamma) = G vec(gamma gamma')
so any evaluation costs O(m k^2) instead of a pass over the sample.  ``vec``
here flattens row-major; for the symmetric matrices involved the choice of
flattening order is immaterial as long as it is used consistently.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .resampling import BootstrapScheme, resample_indices
from .simulate import PanelData
from .validation import (
    ValidationError,
    as_float_array,
    check_int,
    check_unit_vector,
    check_weight_matrix,
    freeze,
)

__all__ = [
    "QuadMomentModel",
    "fit_quadratic_moments",
    "eval_theta",
    "eval_phi",
    "bootstrap_model",
    "panel_from_series",
    "load_panel",
    "save_panel",
    "vec_outer",
]


def vec_outer(gamma: np.ndarray) -> np.ndarray:
    """vec(gamma gamma') as a flat k^2 vector."""
    g = np.asarray(gamma, dtype=float)
    return np.outer(g, g).reshape(-1)


def _vec_outer_rows(gammas: np.ndarray) -> np.ndarray:
    """Row-wise vec(g g') for a (n, k) batch -> (n, k^2)."""
    return (gammas[:, :, None] * gammas[:, None, :]).reshape(gammas.shape[0], -1)


@dataclass(frozen=True)
class QuadMomentModel:
    """The matrices making the sample moment function a quadratic form.

    Fields
    ------
    deltas : (m, k, k) array of symmetric matrices D_j
    g_mat : (m, k^2) array with row j equal to vec(D_j)
    sample_size : number of panel rows T behind the fit
    weight : (m, m) symmetric positive-definite weighting matrix
    """

    deltas: np.ndarray
    g_mat: np.ndarray
    sample_size: int
    weight: np.ndarray

    def __post_init__(self):
        deltas = as_float_array("deltas", self.deltas, ndim=3)
        m, k, k2 = deltas.shape
        if k != k2:
            raise ValidationError(f"deltas must be m x k x k, got {deltas.shape}")
        g_mat = as_float_array("g_mat", self.g_mat, ndim=2)
        if g_mat.shape != (m, k * k):
            raise ValidationError(f"g_mat must be {m}x{k * k}, got {g_mat.shape}")
        object.__setattr__(self, "deltas", freeze(deltas))
        object.__setattr__(self, "g_mat", freeze(g_mat))
        object.__setattr__(self, "sample_size", check_int("sample_size", self.sample_size, minimum=1))
        object.__setattr__(self, "weight", freeze(check_weight_matrix(self.weight, m)))

    @property
    def m(self) -> int:
        return self.deltas.shape[0]

    @property
    def k(self) -> int:
        return self.deltas.shape[1]

    @classmethod
    def from_deltas(cls, deltas, sample_size: int, weight=None) -> "QuadMomentModel":
        """Build a model directly from the quadratic-form matrices."""
        deltas = as_float_array("deltas", deltas, ndim=3)
        deltas = 0.5 * (deltas + deltas.transpose(0, 2, 1))
        m = deltas.shape[0]
        g_mat = deltas.reshape(m, -1)
        if weight is None:
            weight = np.eye(m)
        return cls(deltas=deltas, g_mat=g_mat, sample_size=sample_size, weight=weight)


def fit_quadratic_moments(panel: PanelData, weight=None) -> QuadMomentModel:
    """Estimate the quadratic-form representation from a panel.

    Parameters
    ----------
    panel : PanelData
    weight : optional (m, m) symmetric positive-definite matrix; defaults to
        the identity.
    """
    if not isinstance(panel, PanelData):
        raise ValidationError("panel must be a PanelData")
    t = panel.sample_size
    y, z = panel.y, panel.z
    outer = (y[:, :, None] * y[:, None, :]).reshape(t, -1)
    # centering the instruments first makes a constant column annihilate
    # exactly rather than up to rounding
    centered = z - z.mean(axis=0)[None, :]
    g_mat = (centered.T @ outer) / t
    deltas = g_mat.reshape(panel.m, panel.k, panel.k)
    # enforce exact symmetry; the average of outer products is symmetric up
    # to rounding only
    deltas = 0.5 * (deltas + deltas.transpose(0, 2, 1))
    g_mat = deltas.reshape(panel.m, -1)
    if weight is None:
        weight = np.eye(panel.m)
    return QuadMomentModel(deltas=deltas, g_mat=g_mat, sample_size=t, weight=weight)


def eval_theta(model: QuadMomentModel, gamma) -> np.ndarray:
    """Evaluate the moment function at a unit vector: G vec(gamma gamma')."""
    g = check_unit_vector("gamma", gamma, model.k)
    return model.g_mat @ vec_outer(g)


def eval_phi(model: QuadMomentModel, gamma) -> float:
    """Weighted squared norm theta(gamma)' W theta(gamma)."""
    th = eval_theta(model, gamma)
    return float(th @ model.weight @ th)


def theta_rows(model: QuadMomentModel, gammas: np.ndarray) -> np.ndarray:
    """Moment function at each row of a (n, k) batch -> (n, m)."""
    return _vec_outer_rows(gammas) @ model.g_mat.T


def phi_rows(model: QuadMomentModel, gammas: np.ndarray) -> np.ndarray:
    """Weighted criterion at each row of a (n, k) batch -> (n,)."""
    th = theta_rows(model, gammas)
    return ((th @ model.weight) * th).sum(axis=1)


def bootstrap_model(
    panel: PanelData, scheme: BootstrapScheme, rng: np.random.Generator
) -> QuadMomentModel:
    """Refit the quadratic moments on a row-resampled panel.

    Rows (Z_t, Y_{t+1}) are resampled together and the centering term is
    recomputed from the resampled rows.
    """
    idx = resample_indices(scheme, panel.sample_size, rng)
    return fit_quadratic_moments(panel.take(idx))


def panel_from_series(series) -> PanelData:
    """Build a panel from a raw (T+1, k) series using squared contemporaneous
    components as instruments: row t pairs Z_t = series[t]**2 with Y_{t+1}."""
    arr = as_float_array("series", series, ndim=2)
    if arr.shape[0] < 3:
        raise ValidationError("series needs at least 3 rows")
    return PanelData(y=arr[1:], z=arr[:-1] ** 2)


_HEADER_RE = re.compile(r"^z_1(?:,z_\d+)*(?:,y_\d+)+$")


def save_panel(panel: PanelData, path, comments: tuple[str, ...] = ()) -> None:
    """Write a panel as CSV: header ``z_1,...,z_m,y_1,...,y_k``; rows = time.

    Extra ``comments`` lines are written first, prefixed with '#'.
    """
    header = ",".join(
        [f"z_{j + 1}" for j in range(panel.m)] + [f"y_{j + 1}" for j in range(panel.k)]
    )
    data = np.hstack([panel.z, panel.y])
    with open(path, "w", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(header + "\n")
        for row in data:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_panel(path) -> PanelData:
    """Read a panel written by :func:`save_panel` (comment lines ignored)."""
    header = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line
                continue
            try:
                rows.append([float(v) for v in line.split(",")])
            except ValueError:
                raise ValidationError(f"{path}: malformed data row {line!r}") from None
    if header is None or not _HEADER_RE.match(header):
        raise ValidationError(
            f"{path}: expected header 'z_1,...,z_m,y_1,...,y_k', got {header!r}"
        )
    names = header.split(",")
    m = sum(1 for n in names if n.startswith("z_"))
    k = len(names) - m
    if k < 1 or names[:m] != [f"z_{j + 1}" for j in range(m)] or names[m:] != [
        f"y_{j + 1}" for j in range(k)
    ]:
        raise ValidationError(f"{path}: malformed header {header!r}")
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != m + k:
        raise ValidationError(f"{path}: rows do not match header width {m + k}")
    return PanelData(y=data[:, m:], z=data[:, :m])
