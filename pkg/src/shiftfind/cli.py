"""Command-line interface.

Usage:
    shiftfind gen --n 2 --m 4 --pattern 10 -o inst.json
    shiftfind solve --instance inst.json --shift 1 --algorithm det
    shiftfind verify --instance inst.json --shift 1 --candidate 0
    shiftfind bench --n 256 512 1024 --c 2 --algorithm det brute --trials 20 --seed 0
    shiftfind pd-check --counter morris --epsilon 1 --n 256 --m 512 --trials 99 --seed 0
    shiftfind protocol --strategy full_shift --counter det --n 32 --m 64 --copies 1 3 --seed 0

Exit codes: 0 success, 1 property violation, 2 algorithmic FAIL, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import protocol as proto
from .canonical import CanonicalFunction, InstanceParams, generate, load_instance
from .errors import DomainError
from .oracle import make_oracle
from .seeding import derive_seed, rng
from .solvers import SOLVERS, solve, verify_shift
from .streaming import CounterSpec, empirical_canonical

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_FAIL = 2
EXIT_USAGE = 64

BENCH_COLUMNS = ["algorithm", "n", "m", "seed", "trial", "s_star", "answer", "queries", "correct"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_instance_args(p: argparse.ArgumentParser, with_file: bool = True) -> None:
    if with_file:
        p.add_argument("--instance", help="instance JSON file")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--pattern", help="explicit middle pattern, a 0/1 string of length m-n")
    src.add_argument("--random", action="store_true", help="uniformly random pattern (needs --seed)")
    src.add_argument("--step", type=int, metavar="POS", help="step function switching after POS")
    src.add_argument("--periodic", type=int, metavar="PERIOD")


def _instance_from_args(args) -> CanonicalFunction:
    inline = args.n is not None or args.m is not None
    from_file = getattr(args, "instance", None)
    if from_file and inline:
        raise UsageError("give either --instance or --n/--m, not both")
    if from_file:
        return load_instance(from_file)
    if args.n is None or args.m is None:
        raise UsageError("an instance needs --instance or both --n and --m")
    params = InstanceParams(args.n, args.m)
    if args.pattern is not None:
        return generate("explicit", params, args.pattern)
    if args.random:
        if args.seed is None:
            raise UsageError("--random requires an explicit --seed")
        return generate("random", params, args.seed)
    if args.step is not None:
        return generate("step", params, args.step)
    if args.periodic is not None:
        return generate("periodic", params, args.periodic)
    raise UsageError("choose a pattern source: --pattern, --random, --step or --periodic")


def _write_text(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    f = _instance_from_args(args)
    _write_text(f.serialize() + "\n", args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    f = _instance_from_args(args)
    if args.algorithm in ("hybrid", "elim") and args.seed is None:
        raise UsageError(f"--algorithm {args.algorithm} requires an explicit --seed")
    oracle = make_oracle(f, args.shift)
    report = solve(args.algorithm, f, oracle, args.seed or 0)
    answer = "FAIL" if report.failed else report.answer
    print(f"answer={answer} queries={report.queries} method={report.method}")
    print(json.dumps(report.to_dict() | {"shift": args.shift, "seed": args.seed}, sort_keys=True))
    if report.failed:
        return EXIT_FAIL
    return EXIT_OK if report.answer == args.shift else EXIT_VIOLATION


def cmd_verify(args) -> int:
    f = _instance_from_args(args)
    oracle = make_oracle(f, args.shift)
    verdict = verify_shift(f, oracle, args.candidate)
    print(f"candidate={args.candidate} verdict={'yes' if verdict else 'no'} queries={oracle.queries_made()}")
    return EXIT_OK if verdict == (args.candidate == args.shift) else EXIT_VIOLATION


def _bench_cell(n: int, c: int, algorithms: list[str], root: int, trial: int) -> list[dict]:
    params = InstanceParams(n, c * n)
    f = generate("random", params, derive_seed(root, n, trial, 0))
    s_star = int(rng(root, n, trial, 1).integers(0, n + 1))
    rows = []
    for name in algorithms:
        report = solve(name, f, make_oracle(f, s_star, log_cap=0), derive_seed(root, n, trial, 2))
        rows.append(
            {
                "algorithm": name,
                "n": n,
                "m": params.m,
                "seed": root,
                "trial": trial,
                "s_star": s_star,
                "answer": "FAIL" if report.failed else report.answer,
                "queries": report.queries,
                "correct": int(report.answer == s_star),
            }
        )
    return rows


def bench_rows(
    n_list: list[int], c: int, algorithms: list[str], trials: int, seed: int, jobs: int = 1
) -> list[dict]:
    cells = [(n, trial) for n in n_list for trial in range(trials)]
    args = (
        [n for n, _ in cells],
        [c] * len(cells),
        [algorithms] * len(cells),
        [seed] * len(cells),
        [t for _, t in cells],
    )
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            chunks = list(pool.map(_bench_cell, *args))
    else:
        chunks = list(map(_bench_cell, *args))
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r["algorithm"], r["n"], r["trial"]))
    return rows


def fit_slopes(rows: list[dict]) -> dict[str, float]:
    """Least-squares slope of log(queries) against log(m), per algorithm."""
    slopes = {}
    for name in sorted({r["algorithm"] for r in rows}):
        sel = [r for r in rows if r["algorithm"] == name]
        x = np.log([float(r["m"]) for r in sel])
        y = np.log([float(r["queries"]) for r in sel])
        slopes[name] = float(np.polyfit(x, y, 1)[0])
    return slopes


def cmd_bench(args) -> int:
    if args.c < 2:
        raise UsageError("--c must be an integer >= 2")
    rows = bench_rows(args.n, args.c, args.algorithm, args.trials, args.seed, args.jobs)
    out = open(args.output, "w", encoding="utf-8", newline="") if args.output else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.output:
            out.close()
    for name, slope in fit_slopes(rows).items():
        print(f"slope[{name}] log(queries)~log(m): {slope:.4f}", file=sys.stderr)
    wrong = sum(1 for r in rows if r["answer"] != "FAIL" and not r["correct"])
    return EXIT_VIOLATION if wrong else EXIT_OK


def cmd_pd_check(args) -> int:
    params = InstanceParams(args.n, args.m)
    spec = CounterSpec(args.counter, params, args.epsilon, args.copies)
    est = empirical_canonical(spec, params, args.trials, args.seed, jobs=args.jobs)
    low = est.low_margin_lengths(args.level)
    print(f"counter={spec.label} copies={args.copies} n={params.n} m={params.m} "
          f"trials={args.trials} seed={args.seed}")
    print(f"min_margin={est.min_margin:.4f} mean_margin={float(est.margin.mean()):.4f}")
    print(f"lengths_below_{args.level:g}={len(low)}" + (f" first={low[:10]}" if low else ""))
    print(f"promise_violations={est.violations}")
    if est.ties:
        print(f"tied_lengths={est.ties}")
    return EXIT_OK if est.min_margin >= args.level else EXIT_VIOLATION


def cmd_protocol(args) -> int:
    configs = [
        proto.ProtocolConfig(
            strategy=args.strategy,
            counter=args.counter,
            n=args.n,
            m=args.m,
            copies=copies,
            seed=args.seed + i,
            s_star=args.shift,
            k=args.k,
            epsilon=args.epsilon,
        )
        for copies in args.copies
        for i in range(args.trials)
    ]
    for cfg in configs:
        CounterSpec(cfg.counter, cfg.params, cfg.epsilon, cfg.copies)
    rows = proto.protocol_sweep(configs, jobs=args.jobs)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            proto.write_csv(rows, fh)
    else:
        proto.write_csv(rows, sys.stdout)
    for row in proto.summarize(rows):
        print(
            f"{row['strategy']} {row['counter']} copies={row['copies']} seed={row['seed']}: "
            f"bits={row['message_bits']} mean_queries={row['mean_queries']:.2f} "
            f"success={row['success_rate']:.3f}",
            file=sys.stderr,
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shiftfind", description="Shift finding and pseudo-deterministic counting tools.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write an instance JSON file")
    _add_instance_args(p, with_file=False)
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="recover a hidden shift")
    _add_instance_args(p)
    p.add_argument("--shift", type=int, required=True, help="the hidden shift s*")
    p.add_argument("--algorithm", choices=sorted(SOLVERS), default="det")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run the two-query witness for one candidate shift")
    _add_instance_args(p)
    p.add_argument("--shift", type=int, required=True, help="the hidden shift s*")
    p.add_argument("--candidate", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="query counts over a grid of sizes, as CSV")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--c", type=int, default=2)
    p.add_argument("--algorithm", nargs="+", choices=sorted(SOLVERS), default=["det", "brute"])
    p.add_argument("--trials", type=int, default=20, help="instances per n")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("pd-check", help="estimate a counter's canonical function and margins")
    p.add_argument("--counter", choices=["det", "morris"], default="det")
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, default=99, help="runs per stream length")
    p.add_argument("--level", type=float, default=0.9)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_pd_check)

    p = sub.add_parser("protocol", help="simulate the one-way message protocol, as CSV")
    p.add_argument("--strategy", choices=["full_shift", "bucket"], default="full_shift")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--counter", choices=["det", "morris"], default="det")
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--copies", type=int, nargs="+", default=[1])
    p.add_argument("--shift", type=int, help="Alice's input; default: every admissible input")
    p.add_argument("--trials", type=int, default=1, help="consecutive seeds starting at --seed")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_protocol)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError) as exc:
        print(f"shiftfind {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"shiftfind {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
