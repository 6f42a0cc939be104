"""Replication engine: runs a design across sample sizes, kappa rules, and
estimator kinds, and aggregates rejection rates.

Reproducibility contract: every replication derives its panel stream and its
bootstrap resample seed from (base_seed, design, T, replication index) alone,
all (rule, estimator) combinations within a replication reuse the same panel
and the same resample streams, and aggregation is a deterministic fold, so
the output table is bit-identical for any worker count.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .inference import EST_KINDS, ch_feature_test
from .rngtools import derive_rng, fresh_seed
from .simulate import DesignSpec, simulate_ch_panel
from .tuning import normalize_rule
from .validation import ValidationError, check_alpha, check_int

__all__ = ["McConfig", "McRow", "McTable", "run_design", "emit_table", "read_table"]


@dataclass(frozen=True)
class McConfig:
    """Dimensions of a Monte Carlo study."""

    design: DesignSpec
    sample_sizes: tuple[int, ...]
    reps: int = 500
    b: int = 200
    alpha: float = 0.05
    kappa_rules: tuple = ("T^-1/3",)
    est_kinds: tuple[str, ...] = ("structural",)
    base_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not isinstance(self.design, DesignSpec):
            raise ValidationError("design must be a DesignSpec")
        sizes = tuple(check_int("sample size", t, minimum=2) for t in self.sample_sizes)
        if not sizes:
            raise ValidationError("sample_sizes must be nonempty")
        object.__setattr__(self, "sample_sizes", sizes)
        object.__setattr__(self, "reps", check_int("reps", self.reps, minimum=1))
        object.__setattr__(self, "b", check_int("b", self.b, minimum=1))
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        rules = tuple(self.kappa_rules)
        if not rules:
            raise ValidationError("kappa_rules must be nonempty")
        for rule in rules:
            normalize_rule(rule)
        object.__setattr__(self, "kappa_rules", rules)
        kinds = tuple(self.est_kinds)
        if not kinds or any(kind not in EST_KINDS for kind in kinds):
            raise ValidationError(f"est_kinds must be a nonempty subset of {EST_KINDS}")
        object.__setattr__(self, "est_kinds", kinds)
        object.__setattr__(self, "base_seed", check_int("base_seed", self.base_seed, minimum=0))
        object.__setattr__(self, "workers", check_int("workers", self.workers, minimum=1))


@dataclass(frozen=True)
class McRow:
    design: str
    sample_size: int
    rule: str
    est_kind: str
    reps: int
    b: int
    alpha: float
    reject_rate: float
    mc_se: float


@dataclass(frozen=True)
class McTable:
    rows: tuple[McRow, ...]

    def rate(self, sample_size: int, rule, est_kind: str) -> float:
        label, _ = normalize_rule(rule)
        for row in self.rows:
            if (row.sample_size, row.rule, row.est_kind) == (sample_size, label, est_kind):
                return row.reject_rate
        raise KeyError((sample_size, label, est_kind))


def _design_tag(design: DesignSpec) -> int:
    return zlib.crc32(design.name.encode("utf-8"))


def _replicate(payload):
    config, t, i, panel_hook = payload
    tag = _design_tag(config.design)
    panel = simulate_ch_panel(config.design, t, rng=derive_rng(config.base_seed, tag, t, i, 1))
    if panel_hook is not None:
        panel = panel_hook(panel, i)
    resample_seed = fresh_seed(derive_rng(config.base_seed, tag, t, i, 2))
    rejections = {}
    for rule in config.kappa_rules:
        for kind in config.est_kinds:
            outcome = ch_feature_test(
                panel,
                kappa_rule=rule,
                est_kind=kind,
                b=config.b,
                alpha=config.alpha,
                rng=derive_rng(config.base_seed, tag, t, i, 3),
                resample_seed=resample_seed,
            )
            rejections[(normalize_rule(rule)[0], kind)] = outcome.reject
    return t, i, rejections


def run_design(config: McConfig, panel_hook=None) -> McTable:
    """Run the study and tabulate rejection frequencies.

    ``panel_hook(panel, i)`` optionally transforms each replication's panel
    before testing (a testing seam; requires workers == 1 unless picklable).
    Any replication failure aborts with the failing (T, replication) pair in
    the message so the exact case can be reproduced.
    """
    payloads = [
        (config, t, i, panel_hook) for t in config.sample_sizes for i in range(config.reps)
    ]
    results = []
    if config.workers == 1:
        for payload in payloads:
            results.append(_run_guarded(payload))
    else:
        chunk = max(1, len(payloads) // (config.workers * 8))
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_guarded, payloads, chunksize=chunk))

    counts: dict[tuple, int] = {}
    for t, _i, rejections in sorted(results, key=lambda r: (r[0], r[1])):
        for key, reject in rejections.items():
            counts[(t, *key)] = counts.get((t, *key), 0) + int(reject)

    rows = []
    for t in config.sample_sizes:
        for rule in config.kappa_rules:
            label, _ = normalize_rule(rule)
            for kind in config.est_kinds:
                rate = counts.get((t, label, kind), 0) / config.reps
                rows.append(
                    McRow(
                        design=config.design.name,
                        sample_size=t,
                        rule=label,
                        est_kind=kind,
                        reps=config.reps,
                        b=config.b,
                        alpha=config.alpha,
                        reject_rate=rate,
                        mc_se=float(np.sqrt(rate * (1.0 - rate) / config.reps)),
                    )
                )
    return McTable(rows=tuple(rows))


def _run_guarded(payload):
    _config, t, i, _hook = payload
    try:
        return _replicate(payload)
    except Exception as exc:
        raise RuntimeError(f"replication failed at T={t}, index={i}: {exc}") from exc


_CSV_HEADER = "design,T,rule,estimator,reps,b,alpha,reject_rate,mc_se"


def emit_table(table: McTable, path, comments: tuple[str, ...] = ()) -> None:
    """Write the table as CSV with 4-decimal rates; comment lines first."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(_CSV_HEADER + "\n")
        for row in table.rows:
            fh.write(
                f"{row.design},{row.sample_size},{row.rule},{row.est_kind},"
                f"{row.reps},{row.b},{row.alpha:g},{row.reject_rate:.4f},{row.mc_se:.4f}\n"
            )


def read_table(path) -> McTable:
    """Read a CSV written by :func:`emit_table`."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = None
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line
                if header != _CSV_HEADER:
                    raise ValidationError(f"{path}: unexpected header {header!r}")
                continue
            parts = line.split(",")
            if len(parts) != 9:
                raise ValidationError(f"{path}: malformed row {line!r}")
            rows.append(
                McRow(
                    design=parts[0],
                    sample_size=int(parts[1]),
                    rule=parts[2],
                    est_kind=parts[3],
                    reps=int(parts[4]),
                    b=int(parts[5]),
                    alpha=float(parts[6]),
                    reject_rate=float(parts[7]),
                    mc_se=float(parts[8]),
                )
            )
    if header is None:
        raise ValidationError(f"{path}: empty file")
    return McTable(rows=tuple(rows))
