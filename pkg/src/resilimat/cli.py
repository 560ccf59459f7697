"""Command-line entry point: ``resilimat <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bounds, harness, oracles, setfn
from .errors import ContractError, GuardExceeded, InputError, ResilimatError, UndefinedCurvatureError
from .matroid import UniformMatroid, matroid_from_dict, verify_matroid_axioms
from .solver import solve_resilient

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_GUARD = 0, 1, 2, 3


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {path}: {exc}") from exc


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _problem(args):
    f = setfn.from_dict(_load_json(args.objective))
    i = matroid_from_dict(_load_json(args.matroid), f.n) if args.matroid else UniformMatroid(f.n, f.n)
    ip = matroid_from_dict(_load_json(args.removal_matroid), f.n) if args.removal_matroid else UniformMatroid(f.n, 0)
    return f, i, ip


def cmd_solve(args) -> int:
    f, i, ip = _problem(args)
    out = solve_resilient(f, i, ip)
    res = out.to_dict()
    res["budget"] = 2 * f.n * f.n
    if args.certify:
        memo = setfn.Memo(f)
        worst = oracles.worst_case_removal(memo, out.a, ip)
        opt = oracles.optimal_resilient(memo, i, ip)
        res["worst_case_removal"] = sorted(worst.argset)
        res["worst_case_value"] = worst.value
        res["optimal_value"] = opt.value
        res["ratio"] = worst.value / opt.value if opt.value > 0 else 1.0
    _emit(res, args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    f, i, ip = _problem(args)
    if args.mode == "worst-removal":
        if args.set is None:
            raise InputError("--set is required for worst-removal")
        a = [int(x) for x in args.set.split(",") if x]
        r = oracles.worst_case_removal(f, a, ip)
        res = {"removal": sorted(r.argset), "value": r.value, "explored": r.explored}
    elif args.mode == "optimal":
        r = oracles.optimal_resilient(f, i, ip)
        res = {"a": sorted(r.argset), "removal": sorted(r.removal), "value": r.value, "explored": r.explored}
    elif args.mode == "greedy":
        a = oracles.greedy_nonresilient(f, i)
        res = {"a": sorted(a), "value": f.evaluate(a)}
    else:
        a = oracles.random_feasible(i, args.seed)
        res = {"a": sorted(a), "value": f.evaluate(a), "seed": args.seed}
    _emit(res, args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    b = bounds.BoundInputs(args.alpha, args.beta, args.kappa, args.ctotal)
    res = bounds.all_bounds(b)
    if args.json:
        _emit(res, None)
    else:
        for k, v in res.items():
            print(f"{k}: {v:.6g}" if isinstance(v, float) else f"{k}: {v}")
    return EXIT_OK


def cmd_curvature(args) -> int:
    f = setfn.from_dict(_load_json(args.objective))
    res: dict = {"n": f.n}
    try:
        res["kappa"] = setfn.curvature_kappa(f).kappa
    except UndefinedCurvatureError as exc:
        res["kappa"] = None
        res["kappa_error"] = str(exc)
    if args.exact:
        res["c_total"] = setfn.total_curvature_exact(f, limit=args.limit).c_total
        res["monotone"] = setfn.check_monotone(f, limit=args.limit).ok
        res["submodular"] = setfn.check_submodular(f, limit=args.limit).ok
    res["mode"] = "exact" if args.exact else "kappa-only"
    _emit(res, args.out)
    return EXIT_OK


def cmd_check_matroid(args) -> int:
    d = _load_json(args.matroid)
    m = matroid_from_dict(d, d.get("n"))
    rep = verify_matroid_axioms(m.n, m, limit=args.limit)
    res = {"ok": rep.ok, "rank": m.rank(), "independent_sets": rep.n_independent}
    if not rep.ok:
        res.update(axiom=rep.axiom, x=sorted(rep.x or ()), z=sorted(rep.z or ()))
    _emit(res, None)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_experiment(args) -> int:
    d = _load_json(args.config) if args.config else {}
    for key in ("runs", "rollouts", "workers"):
        if getattr(args, key) is not None:
            d[key] = getattr(args, key)
    if args.seed is not None:
        d["seed"] = args.seed
    if args.csv:
        d["output"] = args.csv
    cfg = harness.ExperimentConfig.from_dict(d)
    rows, summary = harness.run_experiment(cfg)
    if not cfg.output:
        sys.stdout.write(harness.rows_to_csv(rows))
    if args.json:
        _emit(summary, None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="resilimat", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    def problem_flags(sp):
        sp.add_argument("--objective", required=True)
        sp.add_argument("--matroid")
        sp.add_argument("--removal-matroid")
        sp.add_argument("--out")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("solve", help="run the resilient two-phase selection")
    problem_flags(sp)
    sp.add_argument("--certify", action="store_true", help="compare against the exact oracles")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("oracle", help="brute-force reference computations")
    problem_flags(sp)
    sp.add_argument("--mode", choices=["worst-removal", "optimal", "greedy", "random"], required=True)
    sp.add_argument("--set", help="comma-separated ids for worst-removal")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("bounds", help="print approximation bounds")
    sp.add_argument("--alpha", type=int, required=True)
    sp.add_argument("--beta", type=int, required=True)
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--ctotal", type=float)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("curvature", help="curvature (and total curvature with --exact)")
    sp.add_argument("--objective", required=True)
    sp.add_argument("--exact", action="store_true")
    sp.add_argument("--limit", type=int, default=setfn.EXHAUSTIVE_LIMIT)
    sp.add_argument("--out")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_curvature)

    sp = sub.add_parser("check-matroid", help="exhaustively verify the matroid axioms")
    sp.add_argument("--matroid", required=True)
    sp.add_argument("--limit", type=int, default=12)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_check_matroid)

    sp = sub.add_parser("experiment", help="Monte Carlo sensor-selection sweep")
    sp.add_argument("--config")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--runs", type=int)
    sp.add_argument("--rollouts", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--csv", help="CSV output path (summary JSON written alongside)")
    sp.add_argument("--json", action="store_true", help="print the summary as JSON")
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except GuardExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ContractError, ResilimatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
