"""Benchmark scoring functions with known optima and synthetic decision-makers.

Each problem stores its global minimum; for the problems without an analytic
closed-form minimizer the values were computed by a dense grid sweep followed
by bounded local refinement and are re-verified against a multistart oracle
in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "BenchmarkProblem",
    "SyntheticDM",
    "synthetic_query",
    "benchmark_catalog",
    "get_problem",
]


@dataclass(frozen=True)
class BenchmarkProblem:
    name: str
    dimension: int
    lower: np.ndarray
    upper: np.ndarray
    func: Callable[[np.ndarray], float]
    f_star: float
    x_star: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "x_star", np.asarray(self.x_star, dtype=float))


class SyntheticDM:
    """Decision-maker stand-in that compares points by their true scores.

    Comparisons are exact (no tolerance), hence reflexive, antisymmetric and
    transitive.
    """

    def __init__(self, problem: BenchmarkProblem):
        self.problem = problem

    def query(self, xi, xj) -> int:
        fi = float(self.problem.func(np.asarray(xi, dtype=float)))
        fj = float(self.problem.func(np.asarray(xj, dtype=float)))
        if fi < fj:
            return -1
        if fi > fj:
            return 1
        return 0


def synthetic_query(dm: SyntheticDM, xi, xj) -> int:
    return dm.query(xi, xj)


def _bemporad_1d(x: np.ndarray) -> float:
    x = float(x[0]) if np.ndim(x) else float(x)
    return (1.0 + x * np.sin(2.0 * x) * np.cos(3.0 * x) / (1.0 + x**2)) ** 2 + x**2 / 12.0 + x / 10.0


def _gramacy_lee_1d(x: np.ndarray) -> float:
    x = float(x[0]) if np.ndim(x) else float(x)
    return np.sin(10.0 * np.pi * x) / (2.0 * x) + (x - 1.0) ** 4


def _ackley_2d(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return float(
        -20.0 * np.exp(-0.2 * np.sqrt(np.mean(x**2)))
        - np.exp(np.mean(np.cos(2.0 * np.pi * x)))
        + 20.0
        + np.e
    )


def _bukin6_2d(x: np.ndarray) -> float:
    return float(100.0 * np.sqrt(abs(x[1] - 0.01 * x[0] ** 2)) + 0.01 * abs(x[0] + 10.0))


def _levy13_2d(x: np.ndarray) -> float:
    x1, x2 = float(x[0]), float(x[1])
    return (
        np.sin(3.0 * np.pi * x1) ** 2
        + (x1 - 1.0) ** 2 * (1.0 + np.sin(3.0 * np.pi * x2) ** 2)
        + (x2 - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * x2) ** 2)
    )


def _adjiman_2d(x: np.ndarray) -> float:
    x1, x2 = float(x[0]), float(x[1])
    return np.cos(x1) * np.sin(x2) - x1 / (x2**2 + 1.0)


def _rosenbrock_5d(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def _step2_5d(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(np.floor(x + 0.5) ** 2))


def _salomon_5d(x: np.ndarray) -> float:
    norm = float(np.linalg.norm(np.asarray(x, dtype=float)))
    return 1.0 - np.cos(2.0 * np.pi * norm) + 0.1 * norm


def benchmark_catalog() -> list[BenchmarkProblem]:
    """All nine benchmark problems."""
    return [
        BenchmarkProblem(
            name="bemporad_1d",
            dimension=1,
            lower=[-3.0],
            upper=[3.0],
            func=_bemporad_1d,
            f_star=0.2795044960582651,
            x_star=[-0.9597685695158763],
        ),
        BenchmarkProblem(
            name="gramacy_lee_1d",
            dimension=1,
            lower=[0.5],
            upper=[2.5],
            func=_gramacy_lee_1d,
            f_star=-0.8690111349894998,
            x_star=[0.548563444528028],
        ),
        BenchmarkProblem(
            name="ackley_2d",
            dimension=2,
            lower=[-32.0, -32.0],
            upper=[32.0, 32.0],
            func=_ackley_2d,
            f_star=0.0,
            x_star=[0.0, 0.0],
        ),
        BenchmarkProblem(
            name="bukin6_2d",
            dimension=2,
            lower=[-15.0, -3.0],
            upper=[-5.0, 3.0],
            func=_bukin6_2d,
            f_star=0.0,
            x_star=[-10.0, 1.0],
        ),
        BenchmarkProblem(
            name="levy13_2d",
            dimension=2,
            lower=[-10.0, -10.0],
            upper=[10.0, 10.0],
            func=_levy13_2d,
            f_star=0.0,
            x_star=[1.0, 1.0],
        ),
        BenchmarkProblem(
            name="adjiman_2d",
            dimension=2,
            lower=[-1.0, -1.0],
            upper=[2.0, 1.0],
            func=_adjiman_2d,
            f_star=-2.021806783359787,
            x_star=[2.0, 0.10578346945175083],
        ),
        BenchmarkProblem(
            name="rosenbrock_5d",
            dimension=5,
            lower=[-30.0] * 5,
            upper=[30.0] * 5,
            func=_rosenbrock_5d,
            f_star=0.0,
            x_star=[1.0] * 5,
        ),
        BenchmarkProblem(
            name="step2_5d",
            dimension=5,
            lower=[-100.0] * 5,
            upper=[100.0] * 5,
            func=_step2_5d,
            f_star=0.0,
            x_star=[0.0] * 5,
        ),
        BenchmarkProblem(
            name="salomon_5d",
            dimension=5,
            lower=[-100.0] * 5,
            upper=[100.0] * 5,
            func=_salomon_5d,
            f_star=0.0,
            x_star=[0.0] * 5,
        ),
    ]


def get_problem(name: str) -> BenchmarkProblem:
    for p in benchmark_catalog():
        if p.name == name:
            return p
    known = ", ".join(p.name for p in benchmark_catalog())
    raise KeyError(f"unknown benchmark {name!r}; known problems: {known}")
