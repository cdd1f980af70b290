"""Iteration rules deciding when the RBF, Lipschitz and local steps fire.

Static rules fire on iterations divisible by a fixed period (0 = never).
Dynamic rules recompute the period every iteration as
``ceil((intercept + slope * iter) / 1000)``, floored at 1, so the Lipschitz
step becomes rarer and the local step more frequent as the run progresses.

Rule strings::

    static:R1,Li2,Lo4
    dynamic:1-4|8-1
    R1|Li0|Lo1          (ablation triplet, same as static:R1,Li0,Lo1)
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

__all__ = [
    "COMPONENTS",
    "DYNAMIC_VARIANTS",
    "StaticRule",
    "LinearPeriodRule",
    "SchedulePolicy",
    "fires",
    "dry_run_counts",
    "parse_rule",
    "static_policy",
    "dynamic_policy",
]

COMPONENTS = ("rbf", "lipschitz", "local")


@dataclass(frozen=True)
class StaticRule:
    period: int

    def __post_init__(self):
        if self.period < 0:
            raise ValueError("period must be >= 0")

    def fires(self, iteration: int) -> bool:
        return self.period != 0 and iteration % self.period == 0

    def __str__(self):
        return str(self.period)


@dataclass(frozen=True)
class LinearPeriodRule:
    """Fires when ``iter mod max(1, ceil((intercept + slope*iter)/1000)) == 0``."""

    intercept: int
    slope: int

    def divisor(self, iteration: int) -> int:
        # integer ceil; the float form misrounds e.g. 8*125/1000
        return max(1, -((-(self.intercept + self.slope * iteration)) // 1000))

    def fires(self, iteration: int) -> bool:
        return iteration % self.divisor(iteration) == 0


# (Lipschitz slope, Local intercept, Local slope) per named variant
_DYNAMIC_TABLE = {
    "1-4|8-1": (8, 8000, -15),
    "1-6|8-1": (10, 8000, -15),
    "1-8|8-1": (14, 8000, -15),
    "1-4|6-1": (8, 6000, -12),
    "1-6|6-1": (10, 6000, -10),
    "1-8|6-1": (14, 6000, -10),
    "1-4|4-1": (8, 4000, -8),
    "1-6|4-1": (12, 4000, -8),
    "1-8|4-1": (15, 4000, -8),
}
DYNAMIC_VARIANTS = tuple(_DYNAMIC_TABLE)


@dataclass(frozen=True)
class SchedulePolicy:
    rbf: StaticRule | LinearPeriodRule
    lipschitz: StaticRule | LinearPeriodRule
    local: StaticRule | LinearPeriodRule
    name: str = ""

    def rule(self, component: str):
        if component not in COMPONENTS:
            raise ValueError(f"unknown component {component!r}")
        return getattr(self, component)

    @property
    def never_fires(self) -> bool:
        """True when every component is a period-0 static rule."""
        return all(isinstance(r, StaticRule) and r.period == 0 for r in (self.rbf, self.lipschitz, self.local))

    def __str__(self):
        return self.name


def fires(policy: SchedulePolicy, component: str, iteration: int) -> bool:
    if iteration < 1:
        raise ValueError("iterations are counted from 1")
    return policy.rule(component).fires(iteration)


def static_policy(rbf: int = 1, lipschitz: int = 1, local: int = 1) -> SchedulePolicy:
    return SchedulePolicy(
        StaticRule(rbf),
        StaticRule(lipschitz),
        StaticRule(local),
        name=f"static:R{rbf},Li{lipschitz},Lo{local}",
    )


def dynamic_policy(variant: str = "1-4|8-1") -> SchedulePolicy:
    key = variant.replace(" ", "")
    if key.lower().startswith("li"):
        key = key[2:].replace("Lo", "").replace("lo", "")
    if key not in _DYNAMIC_TABLE:
        raise ValueError(f"unknown dynamic variant {variant!r}; choose from {', '.join(DYNAMIC_VARIANTS)}")
    li_slope, lo_intercept, lo_slope = _DYNAMIC_TABLE[key]
    return SchedulePolicy(
        StaticRule(1),
        LinearPeriodRule(0, li_slope),
        LinearPeriodRule(lo_intercept, lo_slope),
        name=f"dynamic:{key}",
    )


_STATIC_RE = re.compile(r"^R(\d+)[,|]Li(\d+)[,|]Lo(\d+)$", re.IGNORECASE)


def parse_rule(text: str) -> SchedulePolicy:
    """Parse ``static:R#,Li#,Lo#``, ``dynamic:<variant>`` or a bare triplet."""
    s = text.strip().replace(" ", "")
    kind, _, body = s.partition(":")
    if not body:
        kind, body = "static", s
    kind = kind.lower()
    if kind == "dynamic":
        return dynamic_policy(body)
    if kind == "static":
        m = _STATIC_RE.match(body)
        if m:
            return static_policy(*(int(g) for g in m.groups()))
    raise ValueError(
        f"cannot parse rule {text!r}; expected 'static:R1,Li2,Lo4', 'R1|Li0|Lo1' or 'dynamic:1-4|8-1'"
    )


def dry_run_counts(policy: SchedulePolicy, initial_points: int, nfe_max: int) -> tuple[int, int, int]:
    """Budget each component would receive if every firing costs one evaluation.

    Components are tried in RBF, Lipschitz, Local order within an iteration
    and the simulation stops the moment the budget is used up.
    """
    if nfe_max <= initial_points:
        raise ValueError("nfe_max must exceed initial_points")
    if policy.never_fires:
        raise ValueError("policy never fires; the whole budget would go to random sampling")
    counts = [0, 0, 0]
    nfe = initial_points
    iteration = 0
    rules = (policy.rbf, policy.lipschitz, policy.local)
    while nfe < nfe_max:
        iteration += 1
        for k, rule in enumerate(rules):
            if nfe < nfe_max and rule.fires(iteration):
                counts[k] += 1
                nfe += 1
    return tuple(counts)
