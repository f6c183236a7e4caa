"""Command-line front end.

Every command is deterministic given its inputs, flags, and seed, and prints
valid JSON on stdout for every success path.  Exit codes: 0 success (and
threshold/verification satisfied), 1 verification or threshold failure,
2 structural/usage errors, 3 fixpoint nonconvergence.  All numbers on the
wire are rational strings except approximate-mode objectives, which are
floats explicitly tagged "approx".
"""
from __future__ import annotations

import argparse
import json
import sys

from . import bvn, envy, solver, verify, x3c
from .instance import Instance, Lottery, StructuralError, rat, rat_str, social_welfare


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _lottery_report(report: solver.SolveReport, inst: Instance) -> dict:
    out = {
        "method": report.method,
        "converged": True,
        "weights": [rat_str(wi) for wi in report.weights_used],
        "social_welfare": rat_str(social_welfare(inst, report.lottery)),
        "lottery": report.lottery.to_json_dict(),
    }
    if report.iterations is not None:
        out["iterations"] = report.iterations
    if report.faces_examined is not None:
        out["faces_examined"] = report.faces_examined
    return out


def _cmd_solve(args) -> int:
    inst = Instance.load(args.instance)
    if args.method == "hull":
        report = solver.hull_solve(inst)
    else:
        report = solver.fixpoint_solve(inst, max_iters=args.max_iters)
        if isinstance(report, solver.NonconvergenceReport):
            _emit({
                "method": "fixpoint",
                "converged": False,
                "iterations": report.iterations,
                "candidates_tested": report.candidates_tested,
                "reason": report.reason,
                "trace": [
                    {"weights": [rat_str(wi) for wi in ws],
                     "envy_arcs": [[l + 1, h + 1] for l, h in arcs]}
                    for ws, arcs in report.trace
                ],
            })
            return 3
    if args.output:
        report.lottery.save(args.output)
    _emit(_lottery_report(report, inst))
    return 0


def _cmd_verify(args) -> int:
    inst = Instance.load(args.instance)
    lot = Lottery.load(args.lottery)
    if args.dump_lp:
        from .verify import _pareto_lp
        from .instance import expected_utility
        own = [expected_utility(inst, lot, i, i) for i in range(inst.n)]
        with open(args.dump_lp, "w", encoding="utf-8") as fh:
            fh.write(_pareto_lp(inst, own).to_text())
            fh.write("\n")
    report = verify.verification_report(inst, lot, mode=args.mode)
    _emit(report)
    return 0 if report["ef"] and not report["pareto"]["dominated"] else 1


def _cmd_welfare(args) -> int:
    inst = Instance.load(args.instance)
    lottery, welfare = solver.max_welfare_ef_po(inst)
    out = {
        "social_welfare": rat_str(welfare),
        "lottery": lottery.to_json_dict(),
    }
    code = 0
    if args.threshold is not None:
        threshold = rat(args.threshold)
        out["threshold"] = rat_str(threshold)
        out["meets_threshold"] = welfare >= threshold
        code = 0 if welfare >= threshold else 1
    _emit(out)
    return code


def _cmd_rho(args) -> int:
    inst = Instance.load(args.instance)
    re = envy.compute_rho(inst)
    _emit({"rho": rat_str(re.rho), "epsilon": rat_str(re.epsilon), "J_size": re.J_size})
    return 0


def _cmd_gen_x3c(args) -> int:
    phi = x3c.X3cInstance.load(args.phi)
    out = x3c.generate(phi)
    for warning in out.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    out.instance.save(args.output)
    summary = {"n": out.instance.n, "m": out.instance.m,
               "epsilon": rat_str(out.epsilon), "R": rat_str(out.R),
               "Q": rat_str(out.Q), "K": rat_str(out.K),
               "instance": args.output}
    if args.sidecar:
        with open(args.sidecar, "w", encoding="utf-8") as fh:
            json.dump(out.sidecar_dict(), fh, indent=2)
            fh.write("\n")
        summary["sidecar"] = args.sidecar
    _emit(summary)
    return 0


def _cmd_witness(args) -> int:
    phi = x3c.X3cInstance.load(args.phi)
    out = x3c.generate(phi)
    try:
        cover = [int(tok) for tok in args.cover.split(",") if tok.strip()]
    except ValueError:
        print(f"error: --cover must be a comma-separated list of triple indices",
              file=sys.stderr)
        return 2
    lot = x3c.witness_lottery(out, cover)
    lot.save(args.output)
    _emit({
        "cover": sorted(cover),
        "social_welfare": rat_str(social_welfare(out.instance, lot)),
        "K": rat_str(out.K),
        "lottery": args.output,
    })
    return 0


def _cmd_decompose(args) -> int:
    inst = Instance.load(args.instance)
    lot = Lottery.load(args.lottery)
    from .instance import validate_lottery
    result = validate_lottery(inst, lot)
    if not result.ok:
        raise StructuralError("invalid lottery: " + "; ".join(result.violations))
    dec = bvn.decompose(lot)
    dec.save(args.output)
    _emit({
        "partitions": dec.m,
        "permutation_counts": [len(entry) for entry in dec.per_partition],
        "decomposition": args.output,
    })
    return 0


def _cmd_sample(args) -> int:
    dec = bvn.BvnDecomposition.load(args.decomposition)
    for k, perm in bvn.sample_many(dec, args.seed, args.count):
        print(json.dumps({"k": k + 1, "perm": [j + 1 for j in perm]}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairlot",
        description="Exact solver, verifier, and instance generator for "
                    "envy-free Pareto-optimal allocation lotteries.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute an envy-free Pareto-optimal lottery")
    p.add_argument("instance")
    p.add_argument("--method", choices=("hull", "fixpoint"), default="hull")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("-o", "--output", help="also write the lottery to this file")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="verify envy-freeness and Pareto optimality")
    p.add_argument("instance")
    p.add_argument("lottery")
    p.add_argument("--mode", choices=("auto", "exact", "approx"), default="auto")
    p.add_argument("--dump-lp", help="write the dominance LP in text form")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("welfare", help="maximize social welfare over EF+PO lotteries")
    p.add_argument("instance")
    p.add_argument("--threshold", help="exit 0 iff the optimum reaches this value")
    p.set_defaults(func=_cmd_welfare)

    p = sub.add_parser("rho", help="print the instance constants rho and epsilon")
    p.add_argument("instance")
    p.set_defaults(func=_cmd_rho)

    p = sub.add_parser("gen-x3c", help="build the hardness-reduction instance")
    p.add_argument("phi")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--sidecar", help="also write parameters and index maps")
    p.set_defaults(func=_cmd_gen_x3c)

    p = sub.add_parser("witness", help="build the witness lottery of an exact cover")
    p.add_argument("phi")
    p.add_argument("--cover", required=True, help="comma-separated triple indices")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_witness)

    p = sub.add_parser("decompose", help="Birkhoff-von Neumann decomposition")
    p.add_argument("instance")
    p.add_argument("lottery")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("sample", help="draw allocations from a decomposition")
    p.add_argument("decomposition")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(func=_cmd_sample)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which matches our contract
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (StructuralError, x3c.InvalidCoverError, solver.CapExceededError,
            OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
