"""The LSADE driver.

Each iteration generates ``D`` DE children around the incumbent and then,
depending on the schedule, spends one true evaluation on

1. the child minimizing the global RBF surrogate,
2. the child minimizing the Lipschitz underestimator,
3. the minimizer of a local RBF fit over the best ``3 D`` points.

The global RBF and Lipschitz models are fit on the archive as it stands at
the start of the iteration; the local model sees every point added so far.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Archive, BoxBounds, BudgetCounter, EvaluatedPoint, RngStream
from .bench import CountingObjective
from .de import DeConfig, generate_children
from .lipschitz import SlopeCache, estimate_k, select_min_lipschitz
from .local_opt import LocalSearchConfig, local_step
from .rbf import RbfKernel, rbf_fit, select_min_rbf
from .sampling import lhs_sample, scale_plan
from .schedule import SchedulePolicy, dynamic_policy, parse_rule

__all__ = ["LsadeConfig", "RunTrace", "run_lsade", "run_variant"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LsadeConfig:
    """Everything that defines one LSADE run.

    ``strict_budget`` makes duplicate proposals spend an evaluation anyway
    (the objective is called, the point is not archived); by default
    duplicates are skipped for free.
    """

    bounds: BoxBounds
    nfe_max: int = 1000
    initial_points: int = 100
    de: DeConfig = field(default_factory=DeConfig)
    kernel: RbfKernel = field(default_factory=RbfKernel)
    alpha: float = 0.01
    local: LocalSearchConfig = field(default_factory=LocalSearchConfig)
    policy: SchedulePolicy = field(default_factory=dynamic_policy)
    seed: int = 0
    strict_budget: bool = False
    max_stall_iterations: int = 1000

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.nfe_max < 1:
            raise ValueError("nfe_max must be >= 1")
        if not self.policy.never_fires:
            if self.initial_points >= self.nfe_max:
                raise ValueError("initial_points must be smaller than nfe_max")
            if self.initial_points < 3:
                raise ValueError("at least three initial points are needed for DE")

    def to_dict(self) -> dict:
        """Fully resolved settings, JSON-serializable."""
        d = self.bounds.dim
        return {
            "dimension": d,
            "lower": self.bounds.lower.tolist(),
            "upper": self.bounds.upper.tolist(),
            "nfe_max": self.nfe_max,
            "initial_points": self.initial_points,
            "de": {
                "f_weight": self.de.f_weight,
                "cr": self.de.cr,
                "n_children": self.de.n_children or d,
                "n_parents": self.de.n_parents,
            },
            "kernel": {"kind": self.kernel.kind, "c": self.kernel.c},
            "alpha": self.alpha,
            "local": {
                "c": self.local.c_factor * d,
                "max_inner_iterations": self.local.max_inner_iterations or 100 * d,
                "gradient_step": self.local.gradient_step,
                "convergence_tol": self.local.convergence_tol,
            },
            "rule": str(self.policy),
            "seed": self.seed,
            "strict_budget": self.strict_budget,
            "max_stall_iterations": self.max_stall_iterations,
        }


@dataclass
class RunTrace:
    """Outcome of a run.

    ``history`` holds one ``(nfe, best_f_so_far)`` row per objective call.
    """

    history: list[tuple[int, float]]
    final_best: EvaluatedPoint
    component_counts: tuple[int, int, int]
    wall_time: float
    nfe: int
    iterations: int
    skipped: tuple[int, int, int] = (0, 0, 0)
    stalled: bool = False
    archive: Archive | None = field(default=None, repr=False, compare=False)

    @property
    def best_f(self) -> float:
        return self.final_best.f


class _Run:
    def __init__(self, objective, cfg: LsadeConfig):
        self.cfg = cfg
        self.obj = objective if isinstance(objective, CountingObjective) else CountingObjective(objective)
        self.rng = RngStream(cfg.seed)
        self.archive = Archive(cfg.bounds.dim, capacity=cfg.nfe_max + 1)
        self.budget = BudgetCounter(cfg.nfe_max)
        self.history: list[tuple[int, float]] = []
        self.counts = [0, 0, 0]
        self.skipped = [0, 0, 0]
        self.best_f = np.inf
        self.best_point: EvaluatedPoint | None = None
        self.slopes = SlopeCache()

    def evaluate(self, x, component: int | None = None, archive: bool = True):
        x = np.asarray(x, dtype=float)
        if not self.cfg.bounds.contains(x):
            raise AssertionError(f"refusing to evaluate out-of-bounds point {x.tolist()}")
        calls_before = self.obj.calls
        value = self.obj(x)
        self.budget.spend()
        assert self.obj.calls == calls_before + 1
        point = EvaluatedPoint(x, value)
        if archive:
            self.archive.insert(point)
        if value < self.best_f:
            self.best_f = value
            self.best_point = point
        self.history.append((self.budget.nfe, self.best_f))
        if component is not None:
            self.counts[component] += 1

    def propose(self, x, component: int) -> bool:
        if self.archive.is_duplicate(x):
            if not self.cfg.strict_budget:
                self.skipped[component] += 1
                return False
            self.evaluate(x, component, archive=False)
            return True
        self.evaluate(x, component)
        return True

    def random_search(self):
        gen = self.rng.stream("random_search")
        b = self.cfg.bounds
        while not self.budget.exhausted:
            self.evaluate(b.lower + gen.random(b.dim) * b.width)

    def initialize(self):
        cfg = self.cfg
        plan = lhs_sample(cfg.initial_points, cfg.bounds.dim, self.rng.stream("sampling"))
        for x in scale_plan(plan, cfg.bounds):
            self.evaluate(x)

    def iterate(self) -> bool:
        cfg, archive, budget = self.cfg, self.archive, self.budget
        policy = cfg.policy
        children = generate_children(archive, cfg.de, cfg.bounds, self.rng.stream("de"))
        it = budget.tick()
        use = (policy.rbf.fires(it), policy.lipschitz.fires(it), policy.local.fires(it))
        # both global surrogates see the archive as of the start of the iteration
        rbf_model = rbf_fit(archive.x, archive.f, cfg.kernel, distances=archive.distances) if use[0] else None
        lip_model = estimate_k(archive, cfg.alpha, self.slopes) if use[1] else None

        progressed = False
        if use[0] and not budget.exhausted:
            progressed |= self.propose(children[select_min_rbf(rbf_model, children)], 0)
        if use[1] and not budget.exhausted:
            progressed |= self.propose(children[select_min_lipschitz(lip_model, children)], 1)
        if use[2] and not budget.exhausted:
            xm = local_step(archive, cfg.kernel, cfg.local, cfg.bounds.dim)
            if xm is None:
                self.skipped[2] += 1
                if cfg.strict_budget:
                    # the local minimizer coincides with an archived point; spend on it anyway
                    xm = archive.x[archive.best_index]
                    self.evaluate(np.clip(xm, cfg.bounds.lower, cfg.bounds.upper), 2, archive=False)
                    progressed = True
            else:
                progressed |= self.propose(xm, 2)
        return progressed

    def run(self) -> RunTrace:
        start = time.perf_counter()
        stalled = False
        if self.cfg.policy.never_fires:
            self.random_search()
        else:
            self.initialize()
            idle = 0
            while not self.budget.exhausted:
                if self.iterate():
                    idle = 0
                    continue
                idle += 1
                if idle >= self.cfg.max_stall_iterations:
                    logger.warning(
                        "stopping after %d iterations without a new evaluation (nfe=%d of %d)",
                        idle, self.budget.nfe, self.cfg.nfe_max,
                    )
                    stalled = True
                    break
        elapsed = time.perf_counter() - start
        assert self.obj.calls == self.budget.nfe
        return RunTrace(
            history=self.history,
            final_best=self.best_point,
            component_counts=tuple(self.counts),
            wall_time=elapsed,
            nfe=self.budget.nfe,
            iterations=self.budget.iter,
            skipped=tuple(self.skipped),
            stalled=stalled,
            archive=self.archive,
        )


def run_lsade(objective, cfg: LsadeConfig) -> RunTrace:
    """Minimize ``objective`` over ``cfg.bounds`` with LSADE.

    ``objective`` maps a 1-D array to a float. It is called at most
    ``cfg.nfe_max`` times; NaN or infinite values raise
    :class:`~lsade.core.NonFiniteObjectiveError`.
    """
    return _Run(objective, cfg).run()


def run_variant(objective, cfg: LsadeConfig, variant) -> RunTrace:
    """Run an ablation variant such as ``"R1|Li0|Lo1"``.

    ``variant`` may also be a triple of booleans or 0/1 flags. Each enabled
    component fires every iteration; ``R0|Li0|Lo0`` is pure random search
    over the whole budget.
    """
    if isinstance(variant, str):
        policy = parse_rule(variant if ":" in variant else f"static:{variant}")
    else:
        flags = tuple(int(bool(v)) for v in variant)
        if len(flags) != 3:
            raise ValueError("variant needs three flags (RBF, Lipschitz, Local)")
        policy = parse_rule("static:R{},Li{},Lo{}".format(*flags))
    return run_lsade(objective, replace(cfg, policy=policy))
