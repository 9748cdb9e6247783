"""Accuracy metrics, data profiles and the batch benchmark harness.

A trial's progress is measured relative to its own starting point:
``acc(N) = (f(best at N) - f(first sample)) / (f* - f(first sample))``,
so 0 means no progress over the first sample and 1 means the global optimum
was reached.  A problem instance counts as solved once ``acc(N) > t``.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .acquisition import Variant
from .benchmarks import BenchmarkProblem, SyntheticDM, get_problem
from .driver import SolverConfig, solve
from .problem import ConstraintSet

__all__ = [
    "RunRecord",
    "DataProfile",
    "accuracy",
    "n_acc",
    "data_profile",
    "convergence_summary",
    "run_trial",
    "run_campaign",
    "write_csv",
    "write_summary",
    "write_plots",
]

NOT_REACHED = "n.r."


@dataclass
class RunRecord:
    """Per-trial trace of the incumbent's true score, one entry per sample."""

    problem: str
    variant: str
    trial: int
    seed: int
    scores: list[float]
    wall_time: float

    @property
    def budget(self) -> int:
        return len(self.scores)


def accuracy(record: RunRecord, f_star: float, N: int) -> float:
    """Relative progress of the incumbent at sample count ``N`` (1-based).

    Defined as 1 for every N when the first sample already attains the
    optimum (the division guard).
    """
    f1 = record.scores[0]
    if f1 == f_star:
        return 1.0
    return (record.scores[N - 1] - f1) / (f_star - f1)


def n_acc(record: RunRecord, f_star: float, t: float) -> Optional[int]:
    """Smallest sample count with accuracy above ``t``; None when never reached."""
    if not 0.0 < t < 1.0:
        raise ValueError("threshold t must lie in (0, 1)")
    for N in range(1, record.budget + 1):
        if accuracy(record, f_star, N) > t:
            return N
    return None


@dataclass
class DataProfile:
    threshold: float
    fractions: list[float]  # solved fraction per sample count, non-decreasing


def data_profile(records: Sequence[RunRecord], f_star: float, t: float) -> DataProfile:
    if not records:
        raise ValueError("at least one run record is required")
    budget = max(r.budget for r in records)
    solved_at = [n_acc(r, f_star, t) for r in records]
    fractions = [
        sum(1 for s in solved_at if s is not None and s <= N) / len(records)
        for N in range(1, budget + 1)
    ]
    return DataProfile(threshold=t, fractions=fractions)


def convergence_summary(records: Sequence[RunRecord]) -> dict[str, list[float]]:
    """Median, best and worst incumbent score per sample count."""
    budget = max(r.budget for r in records)
    med, best, worst = [], [], []
    for N in range(budget):
        vals = [r.scores[N] for r in records if N < r.budget]
        med.append(float(np.median(vals)))
        best.append(float(np.min(vals)))
        worst.append(float(np.max(vals)))
    return {"median": med, "best": best, "worst": worst}


def median_n_acc(records: Sequence[RunRecord], f_star: float, t: float) -> Optional[int]:
    """Median sample count to reach accuracy ``t``; None when the median trial
    never reaches it."""
    vals = sorted(
        (math.inf if v is None else v) for v in (n_acc(r, f_star, t) for r in records)
    )
    mid = len(vals) // 2
    med = vals[mid] if len(vals) % 2 else 0.5 * (vals[mid - 1] + vals[mid])
    return None if math.isinf(med) else int(math.ceil(med))


def run_trial(
    problem: BenchmarkProblem, variant: Variant, trial: int, cfg: SolverConfig
) -> RunRecord:
    """One synthetic-oracle run of a benchmark problem."""
    cfg = replace(cfg, variant=variant, seed=cfg.seed + trial)
    dm = SyntheticDM(problem)
    start = time.perf_counter()
    result = solve(ConstraintSet(problem.lower, problem.upper), dm, cfg)
    elapsed = time.perf_counter() - start
    originals = result.state.original_samples()
    scores = [float(problem.func(originals[i])) for i in result.state.best_trace]
    return RunRecord(
        problem=problem.name,
        variant=variant.value,
        trial=trial,
        seed=cfg.seed,
        scores=scores,
        wall_time=elapsed,
    )


def _trial_job(args) -> RunRecord:
    problem_name, variant_value, trial, cfg = args
    return run_trial(get_problem(problem_name), Variant(variant_value), trial, cfg)


def run_campaign(
    problems: Sequence[BenchmarkProblem],
    variants: Sequence[Variant],
    trials: int,
    cfg: SolverConfig,
    workers: int = 1,
) -> list[RunRecord]:
    """Run every (problem, variant, trial) combination, optionally in parallel."""
    jobs = [
        (p.name, v.value, trial, cfg)
        for p in problems
        for v in variants
        for trial in range(trials)
    ]
    if workers <= 1:
        return [_trial_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_job, jobs))


def write_csv(records: Sequence[RunRecord], path: Path, f_stars: dict[str, float]):
    """Flat CSV: one row per (problem, variant, trial, N)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["problem", "variant", "trial", "seed", "N", "best_value", "accuracy"])
        for r in records:
            f_star = f_stars[r.problem]
            for N in range(1, r.budget + 1):
                writer.writerow(
                    [
                        r.problem,
                        r.variant,
                        r.trial,
                        r.seed,
                        N,
                        repr(r.scores[N - 1]),
                        repr(accuracy(r, f_star, N)),
                    ]
                )


def write_summary(
    records: Sequence[RunRecord], path: Path, f_stars: dict[str, float], t: float
):
    """JSON campaign summary with efficiency and robustness indicators."""
    summary: dict = {"threshold": t, "entries": []}
    keys = sorted({(r.problem, r.variant) for r in records})
    for problem, variant in keys:
        group = [r for r in records if r.problem == problem and r.variant == variant]
        f_star = f_stars[problem]
        solved = [n_acc(r, f_star, t) for r in group]
        med = median_n_acc(group, f_star, t)
        summary["entries"].append(
            {
                "problem": problem,
                "variant": variant,
                "trials": len(group),
                "budget": max(r.budget for r in group),
                "solved_fraction": sum(1 for s in solved if s is not None) / len(group),
                "median_n_acc": med,  # null when not reached
                "mean_wall_time": float(np.mean([r.wall_time for r in group])),
            }
        )
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2)


def format_n_acc(value: Optional[int]) -> str:
    return NOT_REACHED if value is None else str(value)


def write_plots(
    records: Sequence[RunRecord], out_dir: Path, f_stars: dict[str, float], t: float
):
    """Convergence plot and data profile per problem, as SVG files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    problems = sorted({r.problem for r in records})
    for problem in problems:
        f_star = f_stars[problem]
        prob_records = [r for r in records if r.problem == problem]
        variants = sorted({r.variant for r in prob_records})

        fig, ax = plt.subplots(figsize=(6, 4))
        for variant in variants:
            group = [r for r in prob_records if r.variant == variant]
            summ = convergence_summary(group)
            N = np.arange(1, len(summ["median"]) + 1)
            (line,) = ax.plot(N, summ["median"], label=variant)
            ax.fill_between(N, summ["best"], summ["worst"], alpha=0.15, color=line.get_color())
        ax.axhline(f_star, ls="--", c="k", lw=0.8)
        ax.set_xlabel("samples")
        ax.set_ylabel("best score")
        ax.set_title(f"{problem}: convergence")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out_dir / f"{problem}_convergence.svg")
        plt.close(fig)

        fig, ax = plt.subplots(figsize=(6, 4))
        for variant in variants:
            group = [r for r in prob_records if r.variant == variant]
            profile = data_profile(group, f_star, t)
            N = np.arange(1, len(profile.fractions) + 1)
            ax.plot(N, profile.fractions, label=variant)
        ax.set_xlabel("samples")
        ax.set_ylabel(f"fraction solved (acc > {t})")
        ax.set_ylim(-0.02, 1.02)
        ax.set_title(f"{problem}: data profile")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out_dir / f"{problem}_profile.svg")
        plt.close(fig)
