"""Experiment runner and the ``lsade`` command line.

Run ``i`` of an experiment uses seed ``base_seed + i``. Each run writes its
convergence history to ``run_<seed>.csv`` (columns ``nfe,best_f``) and the
experiment writes ``summary.json`` holding the resolved configuration, the
per-run results and the summary statistics.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bench import BenchmarkProblem, get_problem, plugin_objective
from .core import BoxBounds
from .optimizer import LsadeConfig, run_lsade
from .rbf import RbfKernel
from .schedule import dry_run_counts, parse_rule

__all__ = [
    "ExperimentSpec",
    "SummaryStats",
    "RunResult",
    "summarize",
    "run_experiment",
    "write_trace_csv",
    "read_trace_csv",
    "main",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SummaryStats:
    best: float
    mean: float
    worst: float
    std: float
    mean_wall_time: float
    n: int

    def to_dict(self) -> dict:
        return {
            "best": self.best,
            "mean": self.mean,
            "worst": self.worst,
            "std": self.std,
            "n": self.n,
            "mean_wall_time": self.mean_wall_time,
        }


def summarize(values, times=None) -> SummaryStats:
    """Best, mean, worst and sample standard deviation of final values.

    A single value has ``std`` 0.
    """
    v = np.asarray(list(values), dtype=float)
    if v.size == 0:
        raise ValueError("cannot summarize an empty list of results")
    t = np.zeros_like(v) if times is None else np.asarray(list(times), dtype=float)
    if t.size != v.size:
        raise ValueError("values and times have different lengths")
    std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    mean = float(np.mean(v))
    # keep best <= mean <= worst under rounding
    mean = min(max(mean, float(v.min())), float(v.max()))
    return SummaryStats(
        best=float(v.min()),
        mean=mean,
        worst=float(v.max()),
        std=std,
        mean_wall_time=float(np.mean(t)),
        n=int(v.size),
    )


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: ``runs`` seeded replications of a single configuration.

    ``problem`` names a built-in benchmark; with ``plugin_cmd`` set it labels
    an external evaluator instead and ``lower``/``upper`` give its box.
    """

    problem: str
    dim: int
    rule: str = "dynamic:1-4|8-1"
    kernel: str = "multiquadric"
    kernel_c: float = 1.0
    runs: int = 1
    base_seed: int = 0
    budget: int = 1000
    initial_points: int = 100
    output: str | None = None
    workers: int | None = None
    plugin_cmd: str | None = None
    lower: float | None = None
    upper: float | None = None
    strict_budget: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.plugin_cmd is not None and (self.lower is None or self.upper is None):
            raise ValueError("an external evaluator needs explicit lower and upper bounds")

    def seeds(self) -> list[int]:
        return [self.base_seed + i for i in range(self.runs)]

    def bounds(self) -> BoxBounds:
        if self.lower is not None or self.upper is not None:
            if self.lower is None or self.upper is None:
                raise ValueError("give both lower and upper bounds")
            return BoxBounds.uniform(self.lower, self.upper, self.dim)
        return get_problem(self.problem, self.dim).bounds

    def config(self, seed: int) -> LsadeConfig:
        return LsadeConfig(
            bounds=self.bounds(),
            nfe_max=self.budget,
            initial_points=self.initial_points,
            kernel=RbfKernel(self.kernel, self.kernel_c),
            policy=parse_rule(self.rule),
            seed=seed,
            strict_budget=self.strict_budget,
        )


@dataclass(frozen=True)
class RunResult:
    seed: int
    best_f: float
    best_x: list
    nfe: int
    iterations: int
    component_counts: tuple
    skipped: tuple
    stalled: bool
    wall_time: float
    history: list


def _objective(spec: ExperimentSpec):
    if spec.plugin_cmd is not None:
        return plugin_objective(spec.plugin_cmd)
    problem: BenchmarkProblem = get_problem(spec.problem, spec.dim, spec.bounds())
    return problem.objective


def _run_one(spec: ExperimentSpec, seed: int) -> RunResult:
    obj = _objective(spec)
    try:
        trace = run_lsade(obj, spec.config(seed))
    finally:
        close = getattr(obj, "close", None)
        if close is not None:
            close()
    return RunResult(
        seed=seed,
        best_f=trace.best_f,
        best_x=trace.final_best.x.tolist(),
        nfe=trace.nfe,
        iterations=trace.iterations,
        component_counts=trace.component_counts,
        skipped=trace.skipped,
        stalled=trace.stalled,
        wall_time=trace.wall_time,
        history=trace.history,
    )


def write_trace_csv(path, history) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["nfe", "best_f"])
        for nfe, best in history:
            w.writerow([nfe, repr(float(best))])


def read_trace_csv(path) -> list[tuple[int, float]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["nfe", "best_f"]:
        raise ValueError(f"{path}: missing 'nfe,best_f' header")
    return [(int(a), float(b)) for a, b in rows[1:]]


def _worker_count(requested: int | None, runs: int) -> int:
    n = requested
    env = os.environ.get("LSADE_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ValueError(f"LSADE_THREADS must be an integer, got {env!r}") from None
        if cap < 1:
            raise ValueError("LSADE_THREADS must be >= 1")
        n = cap if n is None else min(n, cap)
    if n is None:
        n = 1
    if n < 1:
        raise ValueError("workers must be >= 1")
    return min(n, runs)


def _check_writable(out: Path) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".lsade_write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {str(out)!r} is not writable: {exc}") from exc


def _summary_document(spec: ExperimentSpec, results: list[RunResult], stats: SummaryStats) -> dict:
    cfg = spec.config(spec.base_seed).to_dict()
    cfg.pop("seed")
    return {
        "problem": "plugin" if spec.plugin_cmd else get_problem(spec.problem, spec.dim).name,
        "plugin_cmd": spec.plugin_cmd,
        "config": cfg,
        "runs": spec.runs,
        "seeds": spec.seeds(),
        "results": [
            {
                "seed": r.seed,
                "best_f": r.best_f,
                "best_x": r.best_x,
                "nfe": r.nfe,
                "iterations": r.iterations,
                "component_counts": list(r.component_counts),
                "skipped": list(r.skipped),
                "stalled": r.stalled,
            }
            for r in results
        ],
        "summary": {k: v for k, v in stats.to_dict().items() if k != "mean_wall_time"},
        "wall_time": {
            "per_run": [r.wall_time for r in results],
            "mean": stats.mean_wall_time,
        },
    }


def run_experiment(spec: ExperimentSpec) -> tuple[SummaryStats, list[RunResult]]:
    """Run every seed of ``spec``, persist traces and summary, return the statistics.

    An unwritable output directory raises before any run starts.
    """
    out = Path(spec.output) if spec.output else None
    if out is not None:
        _check_writable(out)
    workers = _worker_count(spec.workers, spec.runs)
    seeds = spec.seeds()
    if workers == 1:
        results = [_run_one(spec, s) for s in seeds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map keeps submission order
            results = list(pool.map(_run_one, [spec] * len(seeds), seeds))
    stats = summarize([r.best_f for r in results], [r.wall_time for r in results])
    if out is not None:
        for r in results:
            write_trace_csv(out / f"run_{r.seed}.csv", r.history)
        doc = _summary_document(spec, results, stats)
        with open(out / "summary.json", "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return stats, results


def _parse_point(text: str) -> np.ndarray:
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise ValueError("empty point")
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ValueError(f"cannot parse point {text!r}") from None


def _add_run_options(p: argparse.ArgumentParser, with_rule: bool) -> None:
    p.add_argument("--problem", default="ellipsoid", help="ellipsoid, rosenbrock, ackley, griewank (or F1..F4)")
    p.add_argument("--dim", type=int, default=30)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--init", type=int, default=100)
    if with_rule:
        p.add_argument("--rule", default="dynamic:1-4|8-1")
    p.add_argument("--kernel", default="multiquadric")
    p.add_argument("--kernel-c", type=float, default=1.0)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--strict-budget", action="store_true", help="spend budget on duplicate proposals")
    p.add_argument("--plugin-cmd", default=None, help="external evaluator command line")
    p.add_argument("--lower", type=float, default=None)
    p.add_argument("--upper", type=float, default=None)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lsade", description="Surrogate-assisted differential evolution.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run seeded replications and summarize them")
    _add_run_options(run, with_rule=True)

    var = sub.add_parser("variants", help="run an R#|Li#|Lo# ablation triplet")
    var.add_argument("--triplet", required=True, help="e.g. R1,Li1,Lo1")
    _add_run_options(var, with_rule=False)

    dry = sub.add_parser("dryrun", help="print the evaluation count each component would get")
    dry.add_argument("--rule", default="dynamic:1-4|8-1")
    dry.add_argument("--init", type=int, default=100)
    dry.add_argument("--budget", type=int, default=1000)

    ev = sub.add_parser("eval", help="evaluate a built-in problem at one point")
    ev.add_argument("--problem", required=True)
    ev.add_argument("--point", required=True, help='comma separated, e.g. "0,0,0"')
    return ap


def _spec_from_args(args, rule: str) -> ExperimentSpec:
    return ExperimentSpec(
        problem=args.problem,
        dim=args.dim,
        rule=rule,
        kernel=args.kernel,
        kernel_c=args.kernel_c,
        runs=args.runs,
        base_seed=args.seed,
        budget=args.budget,
        initial_points=args.init,
        output=args.out,
        workers=args.workers,
        plugin_cmd=args.plugin_cmd,
        lower=args.lower,
        upper=args.upper,
        strict_budget=args.strict_budget,
    )


def _print_experiment(spec: ExperimentSpec) -> None:
    stats, results = run_experiment(spec)
    for r in results:
        print(f"seed {r.seed}: best_f={r.best_f:.6g} nfe={r.nfe} counts={r.component_counts}")
    print(
        f"best={stats.best:.6g} mean={stats.mean:.6g} worst={stats.worst:.6g} "
        f"std={stats.std:.6g} mean_wall_time={stats.mean_wall_time:.2f}s"
    )
    if spec.output:
        print(f"wrote {spec.output}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            _print_experiment(_spec_from_args(args, args.rule))
        elif args.command == "variants":
            body = args.triplet.replace(" ", "").replace("|", ",")
            policy = parse_rule(f"static:{body}")
            _print_experiment(_spec_from_args(args, str(policy)))
        elif args.command == "dryrun":
            counts = dry_run_counts(parse_rule(args.rule), args.init, args.budget)
            print("({}, {}, {})".format(*counts))
        elif args.command == "eval":
            x = _parse_point(args.point)
            value = get_problem(args.problem, x.size)(x)
            print(repr(value))
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"lsade: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
