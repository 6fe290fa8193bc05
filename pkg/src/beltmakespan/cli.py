"""Command-line entry point: ``beltmakespan {solve,bench,gen,ingest,reduce}``.

Exit codes: 0 on success, 1 on validation errors, 2 on I/O errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import statistics
import sys
from pathlib import Path

from . import core, data, harness, hardness, solvers
from .errors import BeltError, CorpusError

log = logging.getLogger("beltmakespan")


def _budget(args) -> solvers.Budget:
    if args.budget_iters is None and args.budget_ms is None:
        return solvers.Budget(max_wall_ms=solvers.DEFAULT_WALL_MS)
    return solvers.Budget(args.budget_iters, args.budget_ms)


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> None:
    inst, warnings = core.validate_instance(core.load_instance(args.instance, validate=False))
    for w in warnings:
        log.warning(w)
    budget = _budget(args)
    params = solvers.SearchParams(args.steps, args.swaps)
    runs = []
    repeats = 1 if args.algo == "brute" else args.repeats
    for r in range(repeats):
        runs.append(
            solvers.solve(inst, args.algo, budget, solvers.substream_seed(args.seed, r), params, args.cap)
        )
    values = [r.best_makespan for r in runs]
    best = min(runs, key=lambda r: r.best_makespan)
    doc = {
        "instance": inst.to_dict(),
        "algo": args.algo,
        "budget": budget.to_dict(),
        "seed": args.seed,
        "lower_bound": core.lower_bound(inst),
        "worst_case_bound": core.worst_case_bound(inst),
        "mean": math.fsum(values) / len(values),
        "min": min(values),
        "std": statistics.pstdev(values),
        "best_sequence": list(best.best_sequence.entries),
        "runs": [r.to_dict() for r in runs],
    }
    _emit(doc, args.out)
    log.info("%s: best makespan %d (lower bound %d)", args.algo, doc["min"], doc["lower_bound"])


def cmd_bench(args) -> None:
    strategies = tuple(s.strip() for s in args.algos.split(",") if s.strip())
    config = harness.BenchConfig(
        strategies=strategies,
        budget=_budget(args),
        repeats=args.repeats,
        seed=args.seed,
        params=solvers.SearchParams(args.steps, args.swaps),
        idle_threshold=args.idle_threshold,
    )
    report = harness.run_benchmark(Path(args.corpus), config)
    harness.write_report(report, args.out, bin_width=args.bin_width)
    for name, r in report.ratios.items():
        vs_h = "n/a" if r["vs_human"] is None else f"{100 * r['vs_human']:.1f}%"
        print(f"{name:8s} vs lower bound {100 * r['vs_lower_bound']:.2f}%  vs human {vs_h}")


def cmd_gen(args) -> None:
    if args.profile:
        profile = data.CorpusProfile.from_dict(json.loads(Path(args.profile).read_text(encoding="utf-8")))
    else:
        profile = data.CorpusProfile()
    if args.seed is not None:
        profile = data.CorpusProfile.from_dict({**profile.to_dict(), "seed": args.seed})
    jobs = data.generate_corpus(profile)
    data.write_corpus(jobs, args.out, profile)
    total = sum(j.instance.total_demand for j in jobs)
    print(f"wrote {len(jobs)} jobs (total demand {total}) to {args.out}")


def cmd_ingest(args) -> None:
    declared = core.load_instance(args.instance)
    res = data.ingest_log(data.load_log(args.log), declared, args.idle_threshold)
    doc = res.to_dict()
    doc["computed_makespan"] = data.computed_makespan(res)
    _emit(doc, args.out)


def cmd_reduce(args) -> None:
    red = hardness.reduce_partition(hardness.parse_ints(args.ints), args.slots)
    if args.out and red.instance is not None:
        core.save_instance(red.instance, args.out)
    _emit(red.to_dict(), None)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="beltmakespan", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def budget_args(sp):
        g = sp.add_argument_group("budget (default: 1000 ms wall clock)")
        g.add_argument("--budget-iters", type=int, help="max sequences per run")
        g.add_argument("--budget-ms", type=float, help="max wall-clock ms per run")
        sp.add_argument("--steps", type=int, default=solvers.DEFAULT_STEPS)
        sp.add_argument("--swaps", type=int, default=solvers.DEFAULT_SWAPS)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--repeats", type=int, default=1)

    sp = sub.add_parser("solve", help="solve one instance")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--algo", required=True, choices=solvers.STRATEGIES)
    sp.add_argument("--cap", type=int, default=solvers.DEFAULT_BRUTE_CAP, help="brute-force size limit")
    sp.add_argument("--out")
    budget_args(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("bench", help="benchmark strategies on a corpus directory")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--algos", default=",".join(harness.RANDOM_STRATEGIES))
    sp.add_argument("--out", required=True)
    sp.add_argument("--idle-threshold", type=float, default=data.DEFAULT_IDLE_THRESHOLD)
    sp.add_argument("--bin-width", type=float, default=5)
    budget_args(sp)
    sp.set_defaults(func=cmd_bench, repeats=10)

    sp = sub.add_parser("gen", help="generate a synthetic corpus")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--profile")
    src.add_argument("--defaults", action="store_true")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("ingest", help="ingest a press-exit timestamp log")
    sp.add_argument("--log", required=True)
    sp.add_argument("--instance", required=True)
    sp.add_argument("--idle-threshold", type=float, default=data.DEFAULT_IDLE_THRESHOLD)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("reduce", help="encode a Partition instance as a belt instance")
    sp.add_argument("--ints", required=True, help="comma-separated positive integers")
    sp.add_argument("--slots", type=int, default=hardness.DEFAULT_SLOTS)
    sp.add_argument("--out", help="also write the instance file here")
    sp.set_defaults(func=cmd_reduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except (OSError, CorpusError) as exc:
        log.error("%s", exc)
        return 2
    except (BeltError, ValueError) as exc:
        log.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
