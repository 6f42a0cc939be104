"""Synthetic data generation: GARCH(1,1) factor paths, the conditionally
heteroskedastic (CH) factor-model panel behind designs D1-D5, and iid scalar
samples for the scalar examples.

All generators are pure functions of (inputs, rng); identical inputs and an
identically seeded generator produce bit-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import (
    ValidationError,
    as_float_array,
    check_int,
    check_positive,
    freeze,
)

__all__ = [
    "GarchParams",
    "DesignSpec",
    "PanelData",
    "DESIGN_NAMES",
    "named_design",
    "simulate_garch_path",
    "simulate_ch_panel",
    "simulate_scalar_iid",
]


@dataclass(frozen=True)
class GarchParams:
    """Parameters of a Gaussian GARCH(1,1) volatility recursion.

    The recursion is ``f[t+1] = sigma[t] * eps[t+1]`` with
    ``sigma2[t] = omega + alpha * f[t]**2 + beta * sigma2[t-1]`` and standard
    normal innovations.  Covariance stationarity requires alpha + beta < 1 so
    the unconditional variance omega / (1 - alpha - beta) exists.
    """

    omega: float
    alpha: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "omega", check_positive("omega", self.omega))
        # alpha = beta = 0 is the degenerate constant-variance case, allowed.
        object.__setattr__(self, "alpha", check_positive("alpha", self.alpha, strict=False))
        object.__setattr__(self, "beta", check_positive("beta", self.beta, strict=False))
        if self.alpha + self.beta >= 1.0:
            raise ValidationError(
                f"alpha + beta must be < 1 for stationarity, got {self.alpha + self.beta!r}"
            )

    @property
    def unconditional_variance(self) -> float:
        return self.omega / (1.0 - self.alpha - self.beta)


@dataclass(frozen=True)
class DesignSpec:
    """A CH factor-model design: Y_t = loadings @ F_t + U_t.

    ``loadings`` is k x p with full column rank; each factor follows its own
    GARCH(1,1) recursion; U_t is iid N(0, idio_var * I_k).
    """

    k: int
    p: int
    loadings: np.ndarray
    garch: tuple[GarchParams, ...]
    idio_var: float = 0.5
    name: str = "custom"

    def __post_init__(self):
        k = check_int("k", self.k, minimum=1)
        p = check_int("p", self.p, minimum=1)
        lam = as_float_array("loadings", self.loadings, ndim=2)
        if lam.shape != (k, p):
            raise ValidationError(f"loadings must be {k}x{p}, got {lam.shape}")
        if p > k:
            raise ValidationError(f"number of factors p={p} exceeds number of assets k={k}")
        if np.linalg.matrix_rank(lam) < p:
            raise ValidationError("loadings must have full column rank")
        garch = tuple(self.garch)
        if len(garch) != p:
            raise ValidationError(f"need {p} GARCH parameter sets, got {len(garch)}")
        if not all(isinstance(g, GarchParams) for g in garch):
            raise ValidationError("garch entries must be GarchParams")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "loadings", freeze(lam))
        object.__setattr__(self, "garch", garch)
        object.__setattr__(self, "idio_var", check_positive("idio_var", self.idio_var))

    @property
    def has_common_feature(self) -> bool:
        """True when the loadings leave a nonzero direction with constant
        conditional variance (p < k)."""
        return self.p < self.k


@dataclass(frozen=True)
class PanelData:
    """Aligned instrument/outcome pairs: row t holds (Z_t, Y_{t+1})."""

    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        y = as_float_array("y", self.y, ndim=2)
        z = as_float_array("z", self.z, ndim=2)
        if y.shape[0] != z.shape[0]:
            raise ValidationError(
                f"y and z must have the same number of rows, got {y.shape[0]} and {z.shape[0]}"
            )
        if y.shape[0] < 2:
            raise ValidationError("panel needs at least 2 rows")
        object.__setattr__(self, "y", freeze(y))
        object.__setattr__(self, "z", freeze(z))

    @property
    def sample_size(self) -> int:
        return self.y.shape[0]

    @property
    def k(self) -> int:
        return self.y.shape[1]

    @property
    def m(self) -> int:
        return self.z.shape[1]

    def take(self, indices: np.ndarray) -> "PanelData":
        """Row-resampled copy; rows (Z_t, Y_{t+1}) move together."""
        idx = np.asarray(indices, dtype=np.intp)
        return PanelData(y=self.y[idx], z=self.z[idx])


_D1_GARCH = GarchParams(0.2, 0.2, 0.6)
_D2_GARCH = GarchParams(0.2, 0.4, 0.4)
_D5_GARCH = GarchParams(0.1, 0.1, 0.8)

_DESIGNS: dict[str, DesignSpec] = {
    "D1": DesignSpec(2, 1, [[1.0], [1.0]], (_D1_GARCH,), name="D1"),
    "D2": DesignSpec(2, 2, np.eye(2), (_D1_GARCH, _D2_GARCH), name="D2"),
    "D3": DesignSpec(3, 1, [[1.0], [1.0], [1.0]], (_D1_GARCH,), name="D3"),
    "D4": DesignSpec(
        3, 2, [[1.0, -1.0], [1.0, 0.0], [1.0, 1.0]], (_D1_GARCH, _D2_GARCH), name="D4"
    ),
    "D5": DesignSpec(3, 3, np.eye(3), (_D1_GARCH, _D2_GARCH, _D5_GARCH), name="D5"),
}

DESIGN_NAMES = tuple(sorted(_DESIGNS))


def named_design(name: str) -> DesignSpec:
    """Look up one of the built-in designs D1..D5."""
    try:
        return _DESIGNS[name.upper()]
    except KeyError:
        raise ValidationError(f"unknown design {name!r}; choose from {DESIGN_NAMES}") from None


def simulate_garch_path(
    params: GarchParams,
    length: int,
    burn_in: int = 0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Simulate a Gaussian GARCH(1,1) path.

    The variance recursion starts at the unconditional variance and the first
    ``burn_in`` draws are discarded, which removes the residual effect of the
    start value.

    Parameters
    ----------
    params : GarchParams
    length : int
        Number of returned observations.
    burn_in : int
        Number of initial draws to discard.
    rng : numpy Generator
    """
    if not isinstance(params, GarchParams):
        params = GarchParams(*params)
    length = check_int("length", length, minimum=1)
    burn_in = check_int("burn_in", burn_in, minimum=0)
    if rng is None:
        raise ValidationError("an explicit rng is required for reproducibility")
    total = length + burn_in
    eps = rng.standard_normal(total)
    path = np.empty(total)
    var = params.unconditional_variance
    for t in range(total):
        path[t] = np.sqrt(var) * eps[t]
        var = params.omega + params.alpha * path[t] ** 2 + params.beta * var
    return path[burn_in:]


def simulate_ch_panel(
    design: DesignSpec,
    horizon: int,
    rng: np.random.Generator | None = None,
) -> PanelData:
    """Simulate an aligned (Z_t, Y_{t+1}) panel from a CH factor design.

    Generates horizon + 101 observations of Y_t = loadings @ F_t + U_t, drops
    the first 100 to wash out start-up effects, and forms the instruments as
    the squared contemporaneous components Z_t = (Y_{1,t}^2, ..., Y_{k,t}^2),
    so the panel has m = k instruments.

    Returns a panel with ``horizon`` rows.
    """
    if not isinstance(design, DesignSpec):
        raise ValidationError("design must be a DesignSpec")
    horizon = check_int("horizon", horizon, minimum=2)
    if rng is None:
        raise ValidationError("an explicit rng is required for reproducibility")
    total = horizon + 101
    factors = np.empty((total, design.p))
    for j, g in enumerate(design.garch):
        factors[:, j] = simulate_garch_path(g, total, burn_in=0, rng=rng)
    shocks = rng.standard_normal((total, design.k)) * np.sqrt(design.idio_var)
    series = factors @ design.loadings.T + shocks
    kept = series[100:]
    return PanelData(y=kept[1:], z=kept[:-1] ** 2)


def simulate_scalar_iid(
    mean: float,
    sd: float,
    n: int,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """iid normal draws with the given mean and standard deviation."""
    mean = float(mean)
    sd = check_positive("sd", sd)
    n = check_int("n", n, minimum=1)
    if rng is None:
        raise ValidationError("an explicit rng is required for reproducibility")
    return mean + sd * rng.standard_normal(n)
