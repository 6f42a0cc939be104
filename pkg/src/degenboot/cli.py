"""Command-line front door: simulate panels, test data files, run Monte
Carlo studies, and run the brute-force oracle cross-checks.

Exit codes: 0 success, 1 validation/usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .moments import load_panel, save_panel
from .inference import ch_feature_test
from .montecarlo import McConfig, emit_table, run_design
from .oracles import (
    check_representation_identity,
    check_sphere_minimization,
    check_structural_derivative,
)
from .resampling import BootstrapScheme
from .rngtools import derive_rng
from .simulate import DESIGN_NAMES, DesignSpec, GarchParams, named_design, simulate_ch_panel
from .tuning import normalize_rule
from .validation import NumericalError, ValidationError

_MC_KEYS = (
    "design",
    "sample_sizes",
    "reps",
    "b",
    "alpha",
    "kappa_rules",
    "est_kinds",
    "base_seed",
    "workers",
)


def _parse_kv_file(path) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def parse_design_file(path) -> DesignSpec:
    """Design spec file: k, p, loadings (rows ';'-separated, entries ','),
    garch (omega,alpha,beta triplets ';'-separated), optional idio_var, name."""
    raw = _parse_kv_file(path)
    try:
        k = int(raw["k"])
        p = int(raw["p"])
        loadings = [[float(v) for v in row.split(",")] for row in raw["loadings"].split(";")]
        garch = tuple(
            GarchParams(*(float(v) for v in trip.split(","))) for trip in raw["garch"].split(";")
        )
    except KeyError as exc:
        raise ValidationError(f"{path}: missing design key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed design value ({exc})") from None
    return DesignSpec(
        k=k,
        p=p,
        loadings=loadings,
        garch=garch,
        idio_var=float(raw.get("idio_var", 0.5)),
        name=raw.get("name", "custom"),
    )


def _resolve_design(name_or_path: str) -> DesignSpec:
    if name_or_path.upper() in DESIGN_NAMES:
        return named_design(name_or_path)
    return parse_design_file(name_or_path)


def _print_config(pairs) -> None:
    print("config: " + " ".join(f"{k}={v}" for k, v in pairs))


def _cmd_simulate(args) -> int:
    design = _resolve_design(args.design)
    pairs = [("design", design.name), ("T", args.T), ("seed", args.seed)]
    _print_config(pairs + [("out", args.out)])
    panel = simulate_ch_panel(design, args.T, rng=derive_rng(args.seed))
    save_panel(panel, args.out, comments=[" ".join(f"{k}={v}" for k, v in pairs)])
    print(f"wrote {panel.sample_size} data rows to {args.out}")
    return 0


def _cmd_test(args) -> int:
    scheme = BootstrapScheme(kind=args.scheme, block_len=args.block_len)
    pairs = [
        ("data", args.data),
        ("kappa_rule", normalize_rule(args.kappa_rule)[0]),
        ("estimator", args.estimator),
        ("b", args.b),
        ("alpha", args.alpha),
        ("scheme", scheme.label()),
        ("seed", args.seed),
    ]
    _print_config(pairs)
    panel = load_panel(args.data)
    outcome = ch_feature_test(
        panel,
        kappa_rule=args.kappa_rule,
        est_kind=args.estimator,
        b=args.b,
        alpha=args.alpha,
        scheme=scheme,
        rng=derive_rng(args.seed),
    )
    gamma = ", ".join(f"{v:.6f}" for v in np.asarray(outcome.minimizer))
    print(f"statistic      : {outcome.statistic:.10g}")
    print(f"critical value : {outcome.crit_value:.10g} (level {outcome.alpha:g}, B={outcome.b})")
    print(f"decision       : {'reject' if outcome.reject else 'do not reject'} the common-feature null")
    print(f"minimizer      : [{gamma}]")
    print("tuning         : " + " ".join(f"{k}={v}" for k, v in outcome.tuning.items()))
    print(f"RESULT stat={outcome.statistic:.10g} crit={outcome.crit_value:.10g} reject={int(outcome.reject)}")
    if not outcome.tuning["stat_converged"]:
        raise NumericalError("sphere minimization did not converge")
    return 0


def _cmd_mc(args) -> int:
    raw = _parse_kv_file(args.config) if args.config else {}
    unknown = set(raw) - set(_MC_KEYS)
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")

    def pick(key, flag):
        return flag if flag is not None else raw.get(key)

    design_src = pick("design", args.design)
    if design_src is None:
        raise ValidationError("design is required (config file or --design)")
    sizes = pick("sample_sizes", args.sample_sizes)
    if sizes is None:
        raise ValidationError("sample_sizes is required (config file or --sample-sizes)")
    if isinstance(sizes, str):
        sizes = tuple(int(v) for v in sizes.split(","))
    rules = pick("kappa_rules", args.kappa_rules)
    rules = tuple((rules or "T^-1/3").split(",")) if isinstance(rules, str) else ("T^-1/3",)
    kinds = pick("est_kinds", args.est_kinds)
    kinds = tuple((kinds or "structural").split(",")) if isinstance(kinds, str) else ("structural",)

    config = McConfig(
        design=_resolve_design(design_src),
        sample_sizes=sizes,
        reps=int(pick("reps", args.reps) or 500),
        b=int(pick("b", args.b) or 200),
        alpha=float(pick("alpha", args.alpha) or 0.05),
        kappa_rules=rules,
        est_kinds=kinds,
        base_seed=int(pick("base_seed", args.base_seed) or 0),
        workers=int(pick("workers", args.workers) or 1),
    )
    pairs = [
        ("design", config.design.name),
        ("sample_sizes", ",".join(str(t) for t in config.sample_sizes)),
        ("reps", config.reps),
        ("b", config.b),
        ("alpha", config.alpha),
        ("kappa_rules", ",".join(normalize_rule(r)[0] for r in config.kappa_rules)),
        ("est_kinds", ",".join(config.est_kinds)),
        ("base_seed", config.base_seed),
        ("workers", config.workers),
    ]
    _print_config(pairs)
    table = run_design(config)
    comments = [" ".join(f"{k}={v}" for k, v in pairs)]
    emit_table(table, args.out, comments=comments)
    manifest = {key: value for key, value in pairs} | {"version": __version__}
    with open(str(args.out) + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    for row in table.rows:
        print(
            f"T={row.sample_size} rule={row.rule} est={row.est_kind} "
            f"reject_rate={row.reject_rate:.4f} mc_se={row.mc_se:.4f}"
        )
    print(f"wrote {args.out}")
    return 0


def _cmd_oracle(args) -> int:
    _print_config([("check", args.check), ("trials", args.trials), ("seed", args.seed), ("k", args.k)])
    if args.check == "sphere":
        report = check_sphere_minimization(trials=args.trials, seed=args.seed, k=args.k)
    elif args.check == "representation":
        report = check_representation_identity(trials=args.trials, seed=args.seed)
    else:
        report = check_structural_derivative(trials=args.trials, seed=args.seed)
    print(report.summary())
    return 0 if report.passed else 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degenboot",
        description="Bootstrap inference for criteria with a vanishing first-order term.",
    )
    parser.add_argument("--version", action="version", version=f"degenboot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate a factor-model panel to CSV")
    p_sim.add_argument("--design", required=True, help="design name (D1..D5) or spec file")
    p_sim.add_argument("--T", type=int, required=True, help="number of panel rows")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=_cmd_simulate)

    p_test = sub.add_parser("test", help="run the common-feature test on a panel CSV")
    p_test.add_argument("data")
    p_test.add_argument("--kappa-rule", default="T^-1/3")
    p_test.add_argument("--estimator", choices=("structural", "numerical"), default="structural")
    p_test.add_argument("--b", type=int, default=200)
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--scheme", choices=("iid_multinomial", "moving_block"), default="iid_multinomial")
    p_test.add_argument("--block-len", type=int, default=None)
    p_test.add_argument("--seed", type=int, default=0)
    p_test.set_defaults(func=_cmd_test)

    p_mc = sub.add_parser("mc", help="run a Monte Carlo study")
    p_mc.add_argument("config", nargs="?", help="key=value config file")
    p_mc.add_argument("--design")
    p_mc.add_argument("--sample-sizes")
    p_mc.add_argument("--reps", type=int)
    p_mc.add_argument("--b", type=int)
    p_mc.add_argument("--alpha", type=float)
    p_mc.add_argument("--kappa-rules")
    p_mc.add_argument("--est-kinds")
    p_mc.add_argument("--base-seed", type=int)
    p_mc.add_argument("--workers", type=int)
    p_mc.add_argument("--out", default="mc_table.csv")
    p_mc.set_defaults(func=_cmd_mc)

    p_or = sub.add_parser("oracle", help="run brute-force cross-checks")
    p_or.add_argument("--check", choices=("sphere", "representation", "derivative"), required=True)
    p_or.add_argument("--trials", type=int, default=25)
    p_or.add_argument("--seed", type=int, default=0)
    p_or.add_argument("--k", type=int, default=2, choices=(2, 3))
    p_or.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
