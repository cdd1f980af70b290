"""Benchmark objectives and adapters for external evaluators.

Built-in problems (global optimum 0 for all four)::

    ellipsoid    sum_i i * x_i**2                  [-5.12, 5.12]^D
    rosenbrock   sum 100(x_{i+1}-x_i^2)^2+(1-x_i)^2  [-2.048, 2.048]^D
    ackley       standard form, a=20, b=0.2, c=2pi  [-32.768, 32.768]^D
    griewank     sum x^2/4000 - prod cos(x_i/sqrt i) + 1   [-600, 600]^D

External objectives speak a line protocol over stdin/stdout: the optimizer
writes ``D`` space-separated reals and a newline, the evaluator answers with
one real and a newline. Closing stdin asks the evaluator to exit.
"""

from __future__ import annotations

import math
import shlex
import subprocess
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import BoxBounds, NonFiniteObjectiveError

__all__ = [
    "ellipsoid",
    "rosenbrock",
    "ackley",
    "griewank",
    "PROBLEMS",
    "BenchmarkProblem",
    "get_problem",
    "CountingObjective",
    "SubprocessObjective",
    "EvaluatorProtocolError",
    "plugin_objective",
]


def ellipsoid(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(np.arange(1, x.size + 1) * x * x))


def rosenbrock(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise ValueError("Rosenbrock needs at least two dimensions")
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def ackley(x) -> float:
    x = np.asarray(x, dtype=float)
    d = x.size
    a = -20.0 * np.exp(-0.2 * np.sqrt(np.sum(x * x) / d))
    b = -np.exp(np.sum(np.cos(2.0 * np.pi * x)) / d)
    return float(a + b + 20.0 + np.e)


def griewank(x) -> float:
    x = np.asarray(x, dtype=float)
    i = np.arange(1, x.size + 1)
    return float(np.sum(x * x) / 4000.0 - np.prod(np.cos(x / np.sqrt(i))) + 1.0)


@dataclass(frozen=True)
class _Entry:
    func: Callable
    low: float
    high: float
    argmin: float


PROBLEMS = {
    "ellipsoid": _Entry(ellipsoid, -5.12, 5.12, 0.0),
    "rosenbrock": _Entry(rosenbrock, -2.048, 2.048, 1.0),
    "ackley": _Entry(ackley, -32.768, 32.768, 0.0),
    "griewank": _Entry(griewank, -600.0, 600.0, 0.0),
}

_ALIASES = {"f1": "ellipsoid", "f2": "rosenbrock", "f3": "ackley", "f4": "griewank"}


@dataclass(frozen=True)
class BenchmarkProblem:
    name: str
    dimension: int
    bounds: BoxBounds
    objective: Callable
    known_optimum: float | None = 0.0
    optimizer: np.ndarray | None = None

    def __call__(self, x) -> float:
        return self.objective(x)


def get_problem(name: str, dim: int, bounds: BoxBounds | None = None) -> BenchmarkProblem:
    """Built-in problem ``name`` (or F1..F4) in ``dim`` dimensions.

    ``bounds`` overrides the default domain.
    """
    key = _ALIASES.get(name.lower(), name.lower())
    if key not in PROBLEMS:
        raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEMS)}")
    entry = PROBLEMS[key]
    if key == "rosenbrock" and dim < 2:
        raise ValueError("Rosenbrock needs at least two dimensions")
    if bounds is None:
        bounds = BoxBounds.uniform(entry.low, entry.high, dim)
    elif bounds.dim != dim:
        raise ValueError("bounds dimension does not match dim")
    return BenchmarkProblem(
        name=key,
        dimension=dim,
        bounds=bounds,
        objective=entry.func,
        known_optimum=0.0,
        optimizer=np.full(dim, entry.argmin),
    )


class CountingObjective:
    """Wrap a callable, count calls and reject non-finite values."""

    def __init__(self, func: Callable):
        self.func = func
        self.calls = 0

    def __call__(self, x) -> float:
        self.calls += 1
        value = float(self.func(np.asarray(x, dtype=float)))
        if not math.isfinite(value):
            raise NonFiniteObjectiveError(
                f"objective returned {value!r} on call {self.calls} at x={np.asarray(x).tolist()}"
            )
        return value

    def close(self):
        close = getattr(self.func, "close", None)
        if close is not None:
            close()


class EvaluatorProtocolError(RuntimeError):
    """The external evaluator answered with something other than one real."""


class SubprocessObjective:
    """Objective evaluated by a long-lived child process (one line per request)."""

    def __init__(self, command: str | Sequence[str], timeout: float | None = None):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None

    def _start(self):
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def __call__(self, x) -> float:
        if self._proc is None:
            self._start()
        proc = self._proc
        request = " ".join(repr(float(v)) for v in np.asarray(x, dtype=float).ravel())
        try:
            proc.stdin.write(request + "\n")
            proc.stdin.flush()
        except BrokenPipeError as exc:
            raise EvaluatorProtocolError(f"evaluator {self.command!r} exited (code {proc.poll()})") from exc
        line = proc.stdout.readline()
        if not line:
            raise EvaluatorProtocolError(
                f"evaluator {self.command!r} closed its output (code {proc.poll()}) after request {request!r}"
            )
        try:
            value = float(line.strip())
        except ValueError:
            raise EvaluatorProtocolError(
                f"evaluator {self.command!r} sent malformed response {line.rstrip()!r}"
            ) from None
        if not math.isfinite(value):
            raise NonFiniteObjectiveError(
                f"evaluator {self.command!r} sent non-finite response {line.rstrip()!r} for request {request!r}"
            )
        return value

    def close(self):
        proc, self._proc = getattr(self, "_proc", None), None
        if proc is None:
            return
        try:
            proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=5 if self.timeout is None else self.timeout)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        self.close()


def plugin_objective(spec) -> CountingObjective:
    """Adapt a callable or an evaluator command line into a counted objective."""
    if callable(spec):
        return CountingObjective(spec)
    if isinstance(spec, (str, list, tuple)):
        return CountingObjective(SubprocessObjective(spec))
    raise TypeError(f"cannot build an objective from {type(spec).__name__}")
