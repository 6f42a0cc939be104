"""Resampling schemes: iid multinomial rows and overlapping moving blocks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .validation import ValidationError, check_int

__all__ = ["BootstrapScheme", "resample_indices"]

_KINDS = ("iid_multinomial", "moving_block")


@dataclass(frozen=True)
class BootstrapScheme:
    """Tagged resampling scheme.

    ``moving_block`` concatenates overlapping blocks of ``block_len``
    consecutive rows with uniformly drawn start positions.  When ``block_len``
    is omitted it defaults to ceil(T**(1/3)) at use time.
    """

    kind: str = "iid_multinomial"
    block_len: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.block_len is not None:
            object.__setattr__(self, "block_len", check_int("block_len", self.block_len, minimum=1))

    def resolved_block_len(self, t: int) -> int:
        length = self.block_len if self.block_len is not None else math.ceil(t ** (1.0 / 3.0))
        if length > t:
            raise ValidationError(f"block_len {length} exceeds sample size {t}")
        return length

    def label(self) -> str:
        if self.kind == "moving_block":
            return f"moving_block({self.block_len if self.block_len is not None else 'T^1/3'})"
        return self.kind


def resample_indices(
    scheme: BootstrapScheme, t: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw a length-t index vector according to the scheme.

    iid: t uniform draws from {0..t-1}.  moving_block: ceil(t / L) overlapping
    blocks of length L with uniform start positions in {0..t-L}, concatenated
    and truncated to t.
    """
    t = check_int("t", t, minimum=1)
    if scheme.kind == "iid_multinomial":
        return rng.integers(0, t, size=t)
    length = scheme.resolved_block_len(t)
    n_blocks = -(-t // length)
    starts = rng.integers(0, t - length + 1, size=n_blocks)
    idx = (starts[:, None] + np.arange(length)[None, :]).reshape(-1)
    return idx[:t]
