"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 estimator aborted, 4 exact-solver cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .dynamics import MAX_SEED, Outcome, drift_samples, expected_drift, rng_stream, run_replicate
from .estimator import Status, estimate, plan
from .exact import DEFAULT_MAX_N, StateSpaceTooLarge, bounds, fixation_exact
from .graph import GENERATORS, Graph, GraphError, parse_edge_list, to_edge_list

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ABORTED = 3
EXIT_CAP = 4

CSV_HEADER = ("index", "start_vertex", "outcome", "steps_taken")


class UsageError(Exception):
    pass


def parse_gen_spec(spec: str) -> tuple[str, int]:
    """``"double-star:10"`` -> ``("double-star", 10)``."""
    kind, sep, n = spec.rpartition(":")
    if not sep or kind not in GENERATORS:
        raise UsageError(f"--gen expects KIND:N with KIND in {sorted(GENERATORS)}, got {spec!r}")
    try:
        return kind, int(n)
    except ValueError:
        raise UsageError(f"--gen size must be an integer, got {n!r}") from None


def parse_subset(spec: str, n: int) -> list[int]:
    """Comma-separated ids and inclusive dash ranges, e.g. ``"0,3,5-7"``."""
    out: set[int] = set()
    for part in spec.split(","):
        part = part.strip()
        if not part:
            raise UsageError(f"empty item in subset {spec!r}")
        lo, dash, hi = part.partition("-")
        try:
            a = int(lo)
            b = int(hi) if dash else a
        except ValueError:
            raise UsageError(f"bad subset item {part!r}") from None
        if a > b:
            raise UsageError(f"descending range {part!r}")
        out.update(range(a, b + 1))
    if any(v < 0 or v >= n for v in out):
        raise UsageError(f"subset {spec!r} has vertices outside 0..{n - 1}")
    if not out:
        raise UsageError("subset is empty")
    if len(out) == n:
        raise UsageError(f"subset {spec!r} is the full vertex set; drift needs a proper subset")
    return sorted(out)


def _load_graph(args) -> tuple[Graph, dict]:
    if args.graph is not None:
        try:
            with open(args.graph, "rb") as fh:
                g = parse_edge_list(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read graph: {exc}") from None
        except GraphError as exc:
            raise UsageError(f"{args.graph}: {exc}") from None
        return g, {"path": args.graph}
    kind, n = parse_gen_spec(args.gen)
    try:
        g = GENERATORS[kind](n)
    except GraphError as exc:
        raise UsageError(str(exc)) from None
    return g, {"generator": kind, "n": n}


def manifest(command: str, source: dict, r: Optional[float], epsilon: Optional[float], seed: Optional[int]) -> dict:
    return {
        "command": command,
        "graph_source": source,
        "r": r,
        "epsilon": epsilon,
        "master_seed": seed,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds").replace("+00:00", "Z"),
    }


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from None


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------------- commands


def cmd_gen(args) -> int:
    if args.kind not in GENERATORS:
        raise UsageError(f"unknown graph kind {args.kind!r}")
    try:
        g = GENERATORS[args.kind](args.n)
    except GraphError as exc:
        raise UsageError(str(exc)) from None
    _emit(to_edge_list(g), args.out)
    return EXIT_OK


def cmd_exact(args) -> int:
    g, source = _load_graph(args)
    try:
        res = fixation_exact(g, args.r, max_n=args.max_n)
    except StateSpaceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    b = bounds(g, args.r)
    slack = 1e-12
    sandwich = (b.lower is None or b.lower <= res.average + slack) and (
        res.average <= b.upper_refined + slack <= b.upper_coarse + 2 * slack
    )
    doc = {
        "manifest": manifest("exact", source, args.r, None, None),
        "result": {
            "n": g.n,
            "per_vertex": [float(v) for v in res.per_vertex],
            "average": res.average,
            "bounds": {
                "lower": b.lower,
                "upper_refined": b.upper_refined,
                "upper_coarse": b.upper_coarse,
                "sandwich_holds": bool(sandwich),
            },
            "absorption_time_bound": b.abs_time_bound,
        },
    }
    _emit(_dump(doc), args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    g, source = _load_graph(args)
    try:
        p = plan(g, args.mode, args.r, args.epsilon, master_seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.replicates is not None or args.max_steps is not None:
        p = p.override(N=args.replicates, T=args.max_steps)
    rep = estimate(g, p, workers=args.workers)
    doc = {
        "manifest": manifest("estimate", source, args.r, args.epsilon, args.seed),
        "result": {
            "n": g.n,
            "plan": {"N": p.N, "T": p.T, "certified": p.certified},
            "report": rep.to_dict(),
        },
    }
    _emit(_dump(doc), args.out)
    return EXIT_ABORTED if rep.status is Status.ABORTED else EXIT_OK


def cmd_simulate(args) -> int:
    g, source = _load_graph(args)
    if args.replicates < 1:
        raise UsageError("--replicates must be at least 1")
    if args.max_steps < 0:
        raise UsageError("--max-steps must be non-negative")
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(manifest("simulate", source, args.r, None, args.seed), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    fixed = 0
    total_steps = 0
    for i in range(args.replicates):
        res = run_replicate(g, args.r, args.max_steps, rng_stream(args.seed, i))
        fixed += res.outcome is Outcome.FIXATION
        total_steps += res.steps_taken
        w.writerow((i, res.start_vertex, res.outcome.value, res.steps_taken))
    w.writerow(("summary", "", repr(fixed / args.replicates), repr(total_steps / args.replicates)))
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_drift(args) -> int:
    g, source = _load_graph(args)
    subset = parse_subset(args.subset, g.n)
    exact = expected_drift(g, subset, args.r)
    empirical = None
    if args.trials:
        inc = drift_samples(g, subset, args.r, args.trials, rng_stream(args.seed, 0))
        stderr = float(inc.std(ddof=1) / math.sqrt(inc.size)) if inc.size > 1 else None
        empirical = {"trials": int(inc.size), "mean": float(inc.mean()), "stderr": stderr}
    doc = {
        "manifest": manifest("drift", source, args.r, None, args.seed if args.trials else None),
        "result": {
            "n": g.n,
            "subset": subset,
            "exact_drift": exact,
            "exact_drift_n3": exact * g.n**3,
            "empirical": empirical,
        },
    }
    _emit(_dump(doc), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {text}")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moran", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def graph_args(p):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--graph", metavar="PATH", help="edge-list file")
        src.add_argument("--gen", metavar="KIND:N", help=f"generated graph, KIND in {sorted(GENERATORS)}")
        p.add_argument("--r", type=_positive, required=True, help="mutant fitness")
        p.add_argument("--out", metavar="PATH", help="output file (default stdout)")

    p = sub.add_parser("gen", help="write a generated graph as an edge list")
    p.add_argument("kind", choices=sorted(GENERATORS))
    p.add_argument("n", type=int)
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("exact", help="exact fixation probabilities and bounds")
    graph_args(p)
    p.add_argument("--max-n", type=int, default=DEFAULT_MAX_N, help="exact-solver cap on n")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("estimate", help="Monte Carlo approximation of fixation or extinction")
    graph_args(p)
    p.add_argument("--mode", choices=("fixation", "extinction"), required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--replicates", type=int, help="override N (exploratory, not certified)")
    p.add_argument("--max-steps", type=int, help="override T (exploratory, not certified)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="per-replicate trajectories as CSV")
    graph_args(p)
    p.add_argument("--replicates", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=np.iinfo(np.int64).max)
    p.add_argument("--seed", type=_seed, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("drift", help="one-step expected potential drift from a mutant set")
    graph_args(p)
    p.add_argument("--subset", required=True, help='mutant set, e.g. "0,3,5-7"')
    p.add_argument("--trials", type=int, default=0, help="also estimate by simulation")
    p.add_argument("--seed", type=_seed, default=0)
    p.set_defaults(func=cmd_drift)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "estimate":
        if args.mode == "fixation" and args.r < 1:
            parser.error(
                "--mode fixation needs r >= 1; no FPRAS for fixation with r < 1 is known "
                "(it is an open problem). Use --mode extinction."
            )
        if not 0 < args.epsilon < 1:
            parser.error("--epsilon must lie in (0, 1)")
        if args.workers < 1:
            parser.error("--workers must be at least 1")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog}: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
