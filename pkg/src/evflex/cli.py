"""Command-line surface.

Subcommands: aggregate, member, robust, montecarlo, fit-constants.
Exit codes: 0 success, 1 computational infeasibility, 2 parse/input error,
3 scenario validation error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .aggregate import AggregateFlexSet, Decomposition, decompose, sorted_vertices
from .ambiguity import epsilon_from_beta, robust_set
from .core import DEFAULT_ATOL
from .errors import (
    BudgetInfeasible,
    DimensionMismatch,
    DomainError,
    EVFlexError,
    InsufficientData,
    NegativeEntry,
    ParseError,
    ValidationError,
)
from .harness import TrialConfig, fit_constants, run_trials
from .io import jsonify, parse_scenario, read_results_csv, write_results_csv


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=int, default=None, help="master random seed")
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    parser.add_argument(
        "--tolerance", type=float, default=DEFAULT_ATOL, help="numeric tolerance"
    )


def _emit_json(payload, out):
    text = json.dumps(jsonify(payload), indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _parse_profile(args) -> np.ndarray:
    if args.profile is not None:
        parts = args.profile.replace(",", " ").split()
        return np.array([float(v) for v in parts])
    if args.profile_file is not None:
        try:
            with open(args.profile_file) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read profile file: {exc}") from exc
        return np.asarray(data, dtype=float)
    raise ParseError("one of --profile/--profile-file is required")


def _cmd_aggregate(args) -> int:
    sc = parse_scenario(args.scenario)
    if sc.population is None:
        raise ValidationError("population: required for the aggregate command")
    aset = AggregateFlexSet.from_population(sc.population)
    _emit_json(
        {
            "T": aset.horizon,
            "N": aset.n,
            "power": aset.power,
            "nu_lo": aset.nu_lo,
            "nu_hi": aset.nu_hi,
            "vertices": sorted_vertices(aset),
        },
        args.out,
    )
    return 0


def _cmd_member(args) -> int:
    sc = parse_scenario(args.scenario)
    if sc.population is None:
        raise ValidationError("population: required for the member command")
    u = _parse_profile(args)
    result = decompose(sc.population, u, atol=args.tolerance)
    member = isinstance(result, Decomposition)
    payload = {"member": member, "profile": u}
    if member:
        payload["witness"] = result.per_ev if args.witness else None
    else:
        payload["deficient_steps"] = list(result.deficient_steps)
        payload["shortfall"] = result.shortfall
    _emit_json(payload, args.out)
    return 0


def _resolve_robust_n(sc) -> int:
    if sc.robust is not None and sc.robust.population_size is not None:
        return sc.robust.population_size
    if sc.harness is not None and len(sc.harness.population_sizes) == 1:
        return sc.harness.population_sizes[0]
    raise ValidationError("robust.N: required (or a single-size harness.N)")


def _cmd_robust(args) -> int:
    sc = parse_scenario(args.scenario)
    if sc.distribution is None:
        raise ValidationError("distribution: required for the robust command")
    if sc.robust is None:
        raise ValidationError("robust: required for the robust command")
    n = _resolve_robust_n(sc)
    spec = sc.robust
    if spec.epsilon is not None:
        eps = spec.epsilon
    else:
        eps = epsilon_from_beta(spec.beta, n, spec.constants)
    result = robust_set(
        sc.distribution,
        n,
        eps,
        sc.grid,
        sc.power,
        constants=spec.constants,
        normalize=spec.normalize,
        atol=args.tolerance,
    )
    _emit_json(
        {
            "epsilon": result.epsilon,
            "beta": result.beta,
            "N": n,
            "T": sc.grid.steps,
            "power": sc.power,
            "projection_cost": result.projection_cost,
            "projected_support": result.projected_support,
            "budget_lo": result.budget_lo,
            "budget_hi": result.budget_hi,
            "i_c_lo": result.i_c_lo,
            "kappa_lo": result.kappa_lo,
            "i_c_hi": result.i_c_hi,
            "kappa_hi": result.kappa_hi,
            "w1_lo": result.w1_lo,
            "w1_hi": result.w1_hi,
            "repaired_lo": result.repaired_lo,
            "repaired_hi": result.repaired_hi,
            "normalization": result.normalization,
            "empty": result.empty,
            "nu_lo": result.flex.nu_lo,
            "nu_hi": result.flex.nu_hi,
            "worst_case_lo": np.column_stack(
                [result.flex.gen_lo.e_lo, result.flex.gen_lo.e_hi]
            ),
            "worst_case_hi": np.column_stack(
                [result.flex.gen_hi.e_lo, result.flex.gen_hi.e_hi]
            ),
        },
        args.out,
    )
    return 0


def _cmd_montecarlo(args) -> int:
    sc = parse_scenario(args.scenario)
    if sc.distribution is None:
        raise ValidationError("distribution: required for the montecarlo command")
    if sc.harness is None:
        raise ValidationError("harness: required for the montecarlo command")
    seed = args.seed if args.seed is not None else sc.harness.seed
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (2**63))
        print(f"generated seed: {seed}", file=sys.stderr)
    stats = []
    for size in sc.harness.population_sizes:
        cfg = TrialConfig(
            distribution=sc.distribution,
            population_size=size,
            epsilons=sc.harness.epsilons_by_n[size],
            trials=sc.harness.trials,
            seed=seed,
            grid=sc.grid,
            power=sc.power,
            atol=args.tolerance,
        )
        stats.extend(run_trials(cfg))
    metadata = {
        "seed": seed,
        "trials": sc.harness.trials,
        "T": sc.grid.steps,
        "power": sc.power,
    }
    if args.out:
        write_results_csv(args.out, stats, metadata)
    else:
        write_results_csv(sys.stdout, stats, metadata)
    return 0


def _cmd_fit_constants(args) -> int:
    rows, _ = read_results_csv(args.csv)
    fit = fit_constants(rows)
    _emit_json(
        {
            "c1": fit.constants.c1,
            "c2": fit.constants.c2,
            "r_squared": fit.r_squared,
            "n_used": fit.n_used,
            "n_excluded": fit.n_excluded,
        },
        args.out,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evflex",
        description="Aggregate flexibility sets for EV charging populations, "
        "with distributionally robust variants and a Monte Carlo certifier.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("aggregate", help="population -> bound vectors and vertices")
    p.add_argument("--scenario", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_aggregate)

    p = sub.add_parser("member", help="aggregate profile membership and witness")
    p.add_argument("--scenario", required=True)
    p.add_argument("--profile", default=None, help="comma/space separated entries")
    p.add_argument("--profile-file", default=None, help="JSON array of entries")
    p.add_argument("--witness", action="store_true", help="emit a decomposition")
    _add_common(p)
    p.set_defaults(func=_cmd_member)

    p = sub.add_parser("robust", help="distributionally robust set summary")
    p.add_argument("--scenario", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_robust)

    p = sub.add_parser("montecarlo", help="violation-rate experiment -> CSV")
    p.add_argument("--scenario", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_montecarlo)

    p = sub.add_parser("fit-constants", help="fit tail-bound constants from a CSV")
    p.add_argument("--csv", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_fit_constants)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DimensionMismatch, NegativeEntry, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (BudgetInfeasible, InsufficientData) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1
    except EVFlexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
