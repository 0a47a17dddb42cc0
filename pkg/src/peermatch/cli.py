"""Command-line entry point.

Exit status: 0 on success, 1 on invalid input or usage, 2 on internal errors.
All output is a deterministic function of the flags.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import generators, io, metrics, oracle, solvers, stability
from .errors import MatchingError
from .market import build_instance, potential, social_welfare


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _seeds(text: str) -> list[int]:
    a, sep, b = text.partition("..")
    if not sep:
        raise UsageError(f"--seeds expects 'a..b', got {text!r}")
    lo, hi = int(a), int(b)
    if hi < lo:
        raise UsageError("--seeds range is empty")
    return list(range(lo, hi + 1))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="peermatch", description="Exchange-stable matching with peer effects.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, instance=True):
        if instance:
            sp.add_argument("--instance", required=True, help="instance JSON file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="directory for result files")
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    def matching_arg(sp):
        sp.add_argument("--matching", help="JSON list of house ids for the real students "
                                           "(default: random matching from --seed)")

    for name in ("solve-greedy", "solve-mcmc"):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--max-iters", type=int)
        sp.add_argument("--trace-csv")
        sp.add_argument("--seeds", help="batch mode: run every seed in 'a..b', one file per seed in --out")
        if name == "solve-greedy":
            sp.add_argument("--pivot", choices=("first-improvement", "best-improvement"), default="first-improvement")
        else:
            sp.add_argument("--temperature", type=float, default=1.0)
            sp.add_argument("--polish", action="store_true")

    sp = sub.add_parser("check-stability")
    common(sp)
    matching_arg(sp)
    sp = sub.add_parser("metrics")
    common(sp)
    matching_arg(sp)
    sp = sub.add_parser("bounds")
    common(sp)
    sp.add_argument("--gamma-star", type=float, help="use this gamma* instead of computing it")
    sp = sub.add_parser("oracle")
    common(sp)

    gen = sub.add_parser("generate")
    gsub = gen.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    g = gsub.add_parser("unbounded-poa")
    g.add_argument("--k", type=float, required=True)
    g = gsub.add_parser("tight")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g = gsub.add_parser("random")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--p", type=float, default=0.2)
    g.add_argument("--weight-model", choices=("unweighted", "weighted", "integer"), default="unweighted")
    g.add_argument("--quotas", help="comma-separated quotas (default: equal split)")
    g.add_argument("--scoring", choices=("additive", "zero"), default="additive")
    g.add_argument("--desirability", choices=("objective", "subjective"), default="objective")
    for g in gsub.choices.values():
        common(g, instance=False)

    ing = sub.add_parser("ingest")
    common(ing, instance=False)
    ing.add_argument("--edges", required=True, help="edge-list file 'u v [w]'")
    ing.add_argument("--policy", choices=("max", "min", "sum", "mean"), default="max")
    ing.add_argument("--houses", type=int, help="number of houses (equal quotas, D ~ Uniform[0,10])")
    ing.add_argument("--quotas", help="comma-separated quotas")
    ing.add_argument("--scoring", choices=("additive", "zero"), default="additive")
    return p


def _emit(args, payload: dict, csv_text: str | None = None, name: str = "result") -> str:
    if args.format == "csv" and csv_text is not None:
        text = csv_text
    elif args.format == "csv":
        text = io.rows_csv([{"field": k, "value": json.dumps(v)} for k, v in payload.items()])
    else:
        text = json.dumps(payload, indent=2, sort_keys=False) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.{args.format}").write_text(text)
    return text


def _matching(args, inst):
    if getattr(args, "matching", None):
        raw = json.loads(Path(args.matching).read_text())
        if isinstance(raw, dict):
            raw = raw["assignment"]
        return io.matching_from_list(inst, raw)
    return solvers.random_matching(inst, args.seed)


def _run_solver(args, inst, seed: int):
    init = solvers.random_matching(inst, seed)
    if args.command == "solve-greedy":
        cfg = solvers.GreedyConfig(max_iterations=args.max_iters or 10**6, pivot_rule=args.pivot, seed=seed)
        final, trace = solvers.solve_greedy(inst, init, cfg)
    else:
        cfg = solvers.McmcConfig(max_iterations=args.max_iters or 10**5, temperature=args.temperature,
                                 seed=seed, polish=args.polish)
        final, trace = solvers.solve_mcmc(inst, init, cfg)
    rep = stability.is_two_sided_exchange_stable(inst, final)
    art = io.RunArtifacts(
        command=args.command,
        instance_hash=io.instance_hash(inst),
        seed=seed,
        matching={"assignment": io.matching_to_list(inst, final), "welfare": social_welfare(inst, final),
                  "potential": potential(inst, final), "stable": rep.stable},
        trace={"iterations": len(trace.records) - 1, "swaps_accepted": trace.swaps_accepted,
               "pair_evaluations": trace.pair_evaluations, "best_welfare": trace.best_welfare,
               "terminated_reason": trace.terminated_reason},
        metrics=io.to_jsonable(metrics.partition_metrics(inst, final)),
    )
    return art.to_dict(), trace


def cmd_solve(args) -> str:
    inst = io.load_instance(args.instance)
    if args.seeds:
        if not args.out:
            raise UsageError("--seeds needs --out")
        seeds = _seeds(args.seeds)
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(lambda s: _run_solver(args, inst, s), seeds))
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for s, (payload, trace) in zip(seeds, results):
            (out / f"result_seed{s}.json").write_text(json.dumps(payload, indent=2) + "\n")
            io.write_trace_csv(trace, out / f"trace_seed{s}.csv")
        return json.dumps({"seeds": seeds, "out": str(out)}) + "\n"
    payload, trace = _run_solver(args, inst, args.seed)
    if args.trace_csv:
        io.write_trace_csv(trace, args.trace_csv)
    return _emit(args, payload, io.trace_csv(trace))


def cmd_check(args) -> str:
    inst = io.load_instance(args.instance)
    mu = _matching(args, inst)
    rep = stability.is_two_sided_exchange_stable(inst, mu)
    art = io.RunArtifacts(args.command, io.instance_hash(inst), args.seed,
                          matching={"assignment": io.matching_to_list(inst, mu)},
                          stability=io.to_jsonable(rep))
    return _emit(args, art.to_dict())


def cmd_metrics(args) -> str:
    inst = io.load_instance(args.instance)
    mu = _matching(args, inst)
    art = io.RunArtifacts(args.command, io.instance_hash(inst), args.seed,
                          matching={"assignment": io.matching_to_list(inst, mu),
                                    "welfare": social_welfare(inst, mu), "potential": potential(inst, mu)},
                          metrics=io.to_jsonable(metrics.partition_metrics(inst, mu)))
    return _emit(args, art.to_dict())


def cmd_bounds(args) -> str:
    inst = io.load_instance(args.instance)
    rep = metrics.bound_report(inst, gamma_star=args.gamma_star,
                               heuristic=metrics.HeuristicConfig(seed=args.seed))
    art = io.RunArtifacts(args.command, io.instance_hash(inst), args.seed, bounds=io.to_jsonable(rep))
    return _emit(args, art.to_dict())


def cmd_oracle(args) -> str:
    inst = io.load_instance(args.instance)
    summary = oracle.exact_extremes(inst)
    art = io.RunArtifacts(args.command, io.instance_hash(inst), args.seed, exact=io.to_jsonable(summary, inst))
    return _emit(args, art.to_dict())


def cmd_generate(args) -> str:
    if args.kind == "unbounded-poa":
        cfg = generators.generate_unbounded_poa(args.k)
    elif args.kind == "tight":
        cfg = generators.generate_tight_example(args.m, args.k)
    else:
        quotas = [int(x) for x in args.quotas.split(",")] if args.quotas else "equal"
        cfg = generators.generate_random_instance(args.n, args.m, seed=args.seed, weight_model=args.weight_model,
                                                  p=args.p, quota_rule=quotas, scoring=args.scoring,
                                                  desirability=args.desirability)
    return _write_instance(args, build_instance(cfg))


def cmd_ingest(args) -> str:
    import numpy as np

    from .market import HouseSpec, InstanceConfig

    el = io.read_edge_list(args.edges, args.policy)
    n = el.network.student_count
    if args.quotas:
        quotas = [int(x) for x in args.quotas.split(",")]
    elif args.houses:
        quotas = generators.equal_quotas(n, args.houses)
    else:
        raise UsageError("ingest needs --houses or --quotas")
    rng = np.random.default_rng(args.seed)
    base = rng.uniform(0, 10, size=len(quotas))
    houses = [HouseSpec(h, q, float(base[h])) for h, q in enumerate(quotas)]
    scoring = "zero" if args.scoring == "zero" else rng.uniform(0, 10, size=(n, len(quotas))).tolist()
    cfg = InstanceConfig(n, houses, el.network.edges(), "objective", scoring, seed=args.seed)
    inst = build_instance(cfg)
    return _write_instance(args, inst)


def _write_instance(args, inst) -> str:
    text = io.dumps_instance(inst)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "instance.json").write_text(text)
    return text


COMMANDS = {
    "solve-greedy": cmd_solve,
    "solve-mcmc": cmd_solve,
    "check-stability": cmd_check,
    "metrics": cmd_metrics,
    "bounds": cmd_bounds,
    "oracle": cmd_oracle,
    "generate": cmd_generate,
    "ingest": cmd_ingest,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text = COMMANDS[args.command](args)
    except (UsageError, MatchingError, FileNotFoundError, json.JSONDecodeError, ValueError) as e:
        print(f"peermatch: error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001
        print(f"peermatch: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
