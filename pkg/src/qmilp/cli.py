"""Command-line entry point: solve, estimate, sweep, verify, oracle."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from pathlib import Path

from .anneal import ExplicitList, LinearThenGeometric, ScheduleError, WalkConfig, run
from .circuit import layout_for, toffoli_equivalents
from .ilp import (
    DomainTooLargeError,
    InfeasibleInstanceError,
    InstanceFormatError,
    argmin_points,
    classical_chain,
    eliminate_equalities,
    enumerate_domain,
    evaluate_form,
    feasible_points,
    gibbs_distribution,
    load_instance,
)
from .scaling import parse_range, rows_to_csv, summarize, summary_to_csv, sweep
from .spectral import (
    MATRIX_GUARD,
    build_walk_matrix,
    detailed_balance_residual,
    eigenphase_gap_check,
    eigenstate_residual,
    unitarity_residual,
)
from .statevector import GuardError
from .walk import AcceptanceMode, model_for, synth_walk_parts

SEED_ENV = "QMILP_SEED"

EXIT_OK, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_GUARD, EXIT_CHECK = 0, 2, 3, 4, 5

UNITARITY_TOL = 1e-10
EIGENSTATE_TOL = 1e-9
BALANCE_TOL = 1e-12


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InstanceFormatError(SEED_ENV, f"not an integer: {raw!r}") from None


def _load(path: str, bits: int | None = None):
    try:
        inst = load_instance(path)
    except OSError as exc:
        raise InstanceFormatError("path", str(exc)) from exc
    if bits is not None:
        inst = dataclasses.replace(inst, d=bits)
    return inst


def _point_header(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


def _histogram(rows, width: int = 40, limit: int = 16) -> str:
    lines = []
    for point, p, feasible, _ in rows[:limit]:
        bar = "#" * round(p * width)
        tag = "" if feasible else "  (infeasible)"
        lines.append(f"{str(point):>14} {p:8.4f} {bar}{tag}")
    return "\n".join(lines)


def cmd_solve(args) -> int:
    inst = eliminate_equalities(_load(args.instance, args.bits))
    if args.betas:
        schedule = ExplicitList(tuple(float(b) for b in args.betas.split(",")))
        q = len(schedule.betas)
    else:
        schedule = LinearThenGeometric(args.linear_stages, args.ratio)
        q = args.q
    config = WalkConfig(
        Q=q, T=args.t_max, schedule=schedule, mode=args.mode, seed=args.seed,
        record_marginals=args.record_marginals, sparse=not args.dense,
    )
    record = run(inst, config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "run.json").write_text(record.to_json(), encoding="utf-8")
    rows = []
    for x in enumerate_domain(inst):
        rows.append((x, record.final_marginal.get(x, 0.0), inst.is_feasible(x), evaluate_form(inst.objective, x)))
    rows.sort(key=lambda r: -r[1])
    with open(out / "marginal.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_point_header(inst.n) + ["probability", "feasible", "f_value"])
        for x, p, feasible, value in rows:
            writer.writerow(list(x) + [repr(p), int(feasible), value])
    print(_histogram(rows))
    print(f"mode {record.mode_point} probability {record.mode_probability:.4f}")
    return EXIT_OK


def estimate_report(inst, beta: float, mode) -> dict:
    inst = eliminate_equalities(inst)
    layout = layout_for(inst)
    parts = synth_walk_parts(inst, model_for(inst, beta, mode, layout), layout)
    report = toffoli_equivalents(parts.circuit)
    return {
        "registers": layout.widths(),
        "num_qubits": layout.num_qubits,
        "beta": beta,
        "mode": AcceptanceMode(mode).value,
        "equalities_split": inst.equalities_split,
        "breakdown": report.breakdown,
        "toffoli_equivalents": report.toffoli_equivalents,
        "gate_counts": report.to_dict()["counts"],
    }


def cmd_estimate(args) -> int:
    print(json.dumps(estimate_report(_load(args.instance, args.bits), args.beta, args.mode), indent=2))
    return EXIT_OK


def cmd_sweep(args) -> int:
    rows = sweep(
        parse_range(args.vars), parse_range(args.bits_range), parse_range(args.constraints_range),
        args.instances, args.coeff_bound, args.seed, args.beta, args.mode, args.workers,
    )
    summary = summarize(rows)
    table = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
        Path(args.out).with_suffix(".summary.csv").write_text(summary_to_csv(summary), encoding="utf-8")
    else:
        sys.stdout.write(table)
    sys.stdout.write(summary_to_csv(summary))
    return EXIT_OK


def verify_report(inst, beta: float, mode) -> dict:
    inst = eliminate_equalities(inst)
    mode = AcceptanceMode(mode)
    exact = mode is AcceptanceMode.EXACT
    layout = layout_for(inst)
    if layout.num_qubits > MATRIX_GUARD:
        raise GuardError(f"verify builds 2^{layout.num_qubits} matrices; guard is k <= {MATRIX_GUARD}")
    unit = unitarity_residual(build_walk_matrix(inst, beta, mode))
    eig = eigenstate_residual(inst, beta, mode)
    bal = detailed_balance_residual(inst, beta, mode)
    gap = eigenphase_gap_check(inst, beta, mode)
    checks = {"unitarity": unit <= UNITARITY_TOL}
    if exact:
        checks["eigenstate"] = eig <= EIGENSTATE_TOL
        checks["detailed_balance"] = bal <= BALANCE_TOL
        checks["eigenphase_gap"] = gap.satisfied
        checks["unique_unit_eigenvalue"] = abs(gap.unit_multiplicity - 1.0) < 1e-6 and gap.pi_overlap > 1 - 1e-6
    return {
        "num_qubits": layout.num_qubits,
        "beta": beta,
        "mode": mode.value,
        "unitarity_residual": unit,
        "eigenstate_residual": eig,
        "detailed_balance_residual": bal,
        "eigenphase": gap.to_dict(),
        "checks": checks,
        "passed": all(checks.values()),
    }


def cmd_verify(args) -> int:
    report = verify_report(_load(args.instance, args.bits), args.beta, args.mode)
    print(json.dumps(report, indent=2))
    return EXIT_OK if report["passed"] else EXIT_CHECK


def oracle_report(inst, beta: float) -> dict:
    inst = eliminate_equalities(inst)
    table = gibbs_distribution(inst, beta)
    best, value = argmin_points(inst)
    chain = classical_chain(inst, beta)
    return {
        "beta": beta,
        "feasible_count": len(feasible_points(inst)),
        "argmin": [list(p) for p in best],
        "min_value": value,
        "classical_gap": chain.gap,
        "gibbs": [{"point": list(x), "probability": p} for x, p in table.entries.items()],
    }


def cmd_oracle(args) -> int:
    print(json.dumps(oracle_report(_load(args.instance, args.bits), args.beta), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmilp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    seed = _default_seed()

    def with_instance(p):
        p.add_argument("instance", help="instance JSON file")
        p.add_argument("--bits", type=int, default=None, help="override bits per variable")

    def with_mode(p, default="exact"):
        p.add_argument("--mode", choices=[m.value for m in AcceptanceMode], default=default)

    p = sub.add_parser("solve", help="run the annealed walk and write run.json / marginal.csv")
    with_instance(p)
    with_mode(p)
    p.add_argument("--q", type=int, default=20, help="number of annealing stages")
    p.add_argument("--t-max", type=int, default=3, help="maximum walk repetitions per stage")
    p.add_argument("--linear-stages", type=int, default=10)
    p.add_argument("--ratio", type=float, default=1.5)
    p.add_argument("--betas", default=None, help="explicit comma-separated schedule (overrides --q)")
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--record-marginals", action="store_true")
    p.add_argument("--dense", action="store_true", help="use the dense statevector backend")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("estimate", help="qubit and Toffoli-equivalent report for one W")
    with_instance(p)
    with_mode(p, "linear")
    p.add_argument("--beta", type=float, default=1.0)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="resource scaling over random instances")
    p.add_argument("--vars", default="3")
    p.add_argument("--bits-range", default="2..8")
    p.add_argument("--constraints-range", "--constraints", dest="constraints_range", default="1..4")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--coeff-bound", type=int, default=4)
    p.add_argument("--beta", type=float, default=1.0)
    with_mode(p, "linear")
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="CSV path; the fit summary goes next to it")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="unitarity, eigenstate, balance and gap checks")
    with_instance(p)
    with_mode(p)
    p.add_argument("--beta", type=float, default=1.0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="classical Gibbs table, argmin and chain gap")
    with_instance(p)
    p.add_argument("--beta", type=float, default=1.0)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (InstanceFormatError, ScheduleError, json.JSONDecodeError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InfeasibleInstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (GuardError, DomainTooLargeError) as exc:
        print(f"error: guard: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
