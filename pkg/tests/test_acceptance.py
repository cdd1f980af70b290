"""Acceptance criteria, each at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line. The benchmark criteria run
five seeded replications at D=30 and budget 1000; results shared between
criteria are computed once per session. Set ``LSADE_THREADS`` to run the
replications in parallel.
"""

import functools
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from lsade.core import Archive, EvaluatedPoint
from lsade.harness import ExperimentSpec, main, run_experiment
from lsade.lipschitz import SlopeCache, max_pairwise_slope
from lsade.local_opt import LocalBox, minimize_local
from lsade.rbf import RbfKernel, rbf_fit, rbf_value
from lsade.schedule import dry_run_counts, dynamic_policy

TESTS = Path(__file__).parent

SEEDS = 5
DIM = 30
BUDGET = 1000
INIT = 100
DEFAULT_RULE = "dynamic:1-4|8-1"

PUBLISHED_COUNTS = {
    "1-4|8-1": (495, 260, 145),
    "1-6|8-1": (510, 231, 159),
    "1-8|8-1": (531, 189, 180),
    "1-4|6-1": (471, 254, 175),
    "1-6|6-1": (512, 231, 157),
    "1-8|6-1": (533, 189, 178),
    "1-4|4-1": (445, 248, 207),
    "1-6|4-1": (469, 200, 231),
    "1-8|4-1": (483, 172, 245),
}


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")


@functools.lru_cache(maxsize=None)
def finals(problem, rule=DEFAULT_RULE, kernel="multiquadric"):
    spec = ExperimentSpec(
        problem=problem,
        dim=DIM,
        rule=rule,
        kernel=kernel,
        kernel_c=1.0,
        runs=SEEDS,
        base_seed=0,
        budget=BUDGET,
        initial_points=INIT,
    )
    stats, results = run_experiment(spec)
    assert all(r.nfe == BUDGET for r in results)
    return stats.mean, tuple(r.best_f for r in results), sum(r.wall_time for r in results)


def _fmt(values):
    return "[" + ", ".join(f"{v:.4g}" for v in values) + "]"


def test_criterion_1_dry_run_counts(capsys):
    start = time.perf_counter()
    got = {v: dry_run_counts(dynamic_policy(v), INIT, BUDGET) for v in PUBLISHED_COUNTS}
    in_process = time.perf_counter() - start
    start = time.perf_counter()
    out = subprocess.run(
        [sys.executable, "-m", "lsade", "dryrun", "--rule", "dynamic:1-8|4-1", "--init", "100", "--budget", "1000"],
        capture_output=True, text=True,
    )
    cli = time.perf_counter() - start
    exact = got == PUBLISHED_COUNTS
    ok = exact and out.stdout.strip() == "(483, 172, 245)" and in_process < 1.0 and cli < 1.0
    report(capsys, 1, ok, f"nine dry-run triples exact={exact}, {in_process:.3f}s in process, CLI {cli:.2f}s")
    assert exact, {v: (got[v], PUBLISHED_COUNTS[v]) for v in got if got[v] != PUBLISHED_COUNTS[v]}
    assert out.stdout.strip() == "(483, 172, 245)"
    assert in_process < 1.0 and cli < 1.0


def test_criterion_1_cli_all_variants(capsys):
    for variant, triple in PUBLISHED_COUNTS.items():
        assert main(["dryrun", "--rule", f"dynamic:{variant}", "--init", "100", "--budget", "1000"]) == 0
        assert capsys.readouterr().out.strip() == str(triple)


@pytest.mark.parametrize(
    "number, problem, threshold, published",
    [
        (2, "ellipsoid", 0.1, 0.0113),
        (3, "griewank", 0.5, 0.051),
        (4, "rosenbrock", 35.0, 27.06),
    ],
)
def test_criteria_2_to_4_benchmark_means(capsys, number, problem, threshold, published):
    mean, values, wall = finals(problem)
    ok = mean <= threshold
    report(
        capsys, number, ok,
        f"{problem} D={DIM} MQ {DEFAULT_RULE}: mean {mean:.4g} (limit {threshold}, published {published}) "
        f"over seeds {_fmt(values)}, {wall:.0f}s",
    )
    assert mean <= threshold


def test_criterion_5_ablation_ordering(capsys):
    full, fv, _ = finals("ellipsoid", rule="static:R1,Li1,Lo1")
    rand, rv, _ = finals("ellipsoid", rule="static:R0,Li0,Lo0")
    ok = full <= rand / 10.0
    report(capsys, 5, ok, f"ellipsoid R1|Li1|Lo1 mean {full:.4g} vs R0|Li0|Lo0 mean {rand:.4g} / 10")
    assert full <= rand / 10.0


def test_criterion_6_kernel_directionality(capsys):
    cubic, cv, _ = finals("ackley", kernel="cubic")
    linear, lv, _ = finals("ackley", kernel="linear")
    ok = cubic <= linear
    report(capsys, 6, ok, f"ackley cubic mean {cubic:.4g} {_fmt(cv)} vs linear mean {linear:.4g} {_fmt(lv)}")
    assert cubic <= linear


def test_criterion_7_property_suites(capsys):
    suites = [
        "test_lipschitz.py",
        "test_rbf.py",
        "test_local_opt.py",
        "test_optimizer.py",
        "test_sampling.py",
        "test_core.py",
        "test_de.py",
        "test_schedule.py",
    ]
    start = time.perf_counter()
    out = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *(str(TESTS / s) for s in suites)],
        capture_output=True, text=True,
    )
    elapsed = time.perf_counter() - start
    ok = out.returncode == 0 and elapsed < 60.0
    last = out.stdout.strip().splitlines()[-1] if out.stdout.strip() else out.stderr.strip()
    report(capsys, 7, ok, f"property suites: {last} in {elapsed:.1f}s (limit 60s)")
    assert out.returncode == 0, out.stdout[-2000:]
    assert elapsed < 60.0


def test_criterion_8_brute_force_oracles(capsys):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 40))
        d = int(rng.integers(1, 8))
        archive = Archive(d)
        cache = SlopeCache()
        # update the cache in several batches to exercise the incremental path
        cuts = sorted(set(rng.integers(1, n + 1, size=3).tolist() + [n]))
        xs = rng.normal(size=(n, d)) * rng.uniform(0.1, 10.0)
        fs = rng.normal(size=n) * rng.uniform(0.1, 100.0)
        done = 0
        for cut in cuts:
            for i in range(done, cut):
                archive.insert(EvaluatedPoint(xs[i], float(fs[i])))
            done = cut
            cached = cache.update(archive)
        oracle = max_pairwise_slope(archive.x, archive.f)
        worst = max(worst, abs(cached - oracle) / max(1.0, oracle))
        assert cached == pytest.approx(oracle, rel=1e-12, abs=1e-12)

    model = rbf_fit([[0.0], [1.0]], [0.0, 1.0], RbfKernel("multiquadric", 1.0))
    grid = np.linspace(0.0, 1.0, 10001)
    gmin = float(np.min(rbf_value(model, grid[:, None])))
    x = minimize_local(model, LocalBox(np.array([0.0]), np.array([1.0])), [0.5])
    gap = rbf_value(model, x) - gmin
    ok = worst <= 1e-12 and gap <= 1e-4
    report(capsys, 8, ok, f"slope cache vs O(t^2) on 200 archives (max rel diff {worst:.1e}); 1-D grid gap {gap:.1e}")
    assert gap <= 1e-4
