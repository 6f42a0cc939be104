"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


class ValidationError(ValueError):
    """Raised when user-supplied data or parameters are malformed."""


class NumericalError(RuntimeError):
    """Raised when an iterative routine fails beyond its retry budget."""


def check_positive(name: str, value, *, strict: bool = True) -> float:
    value = float(value)
    ok = value > 0.0 if strict else value >= 0.0
    if not np.isfinite(value) or not ok:
        bound = "> 0" if strict else ">= 0"
        raise ValidationError(f"{name} must be {bound}, got {value!r}")
    return value


def check_int(name: str, value, *, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


def as_float_array(name: str, x, *, ndim: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def check_unit_vector(name: str, gamma, k: int | None = None, *, tol: float = 1e-12) -> np.ndarray:
    g = as_float_array(name, gamma, ndim=1)
    if k is not None and g.shape[0] != k:
        raise ValidationError(f"{name} must have length {k}, got {g.shape[0]}")
    nrm = float(np.linalg.norm(g))
    if abs(nrm - 1.0) > tol:
        raise ValidationError(f"{name} must have unit norm, got norm {nrm!r}")
    return g


def check_weight_matrix(weight, m: int) -> np.ndarray:
    w = as_float_array("weight", weight, ndim=2)
    if w.shape != (m, m):
        raise ValidationError(f"weight must be {m}x{m}, got {w.shape}")
    if not np.allclose(w, w.T, atol=1e-10):
        raise ValidationError("weight must be symmetric")
    w = 0.5 * (w + w.T)
    if np.linalg.eigvalsh(w).min() <= 0.0:
        raise ValidationError("weight must be positive definite")
    return w


def freeze(arr: np.ndarray) -> np.ndarray:
    """Return a read-only contiguous float copy, for immutable dataclass fields."""
    out = np.ascontiguousarray(arr, dtype=float)
    out.setflags(write=False)
    return out
