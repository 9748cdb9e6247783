"""Command-line entry points: benchmark harness, interactive solve, server."""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from .acquisition import Variant
from .benchmarks import benchmark_catalog, get_problem
from .driver import SolverConfig, solve
from .evaluation import run_campaign, write_csv, write_plots, write_summary
from .problem import ConstraintSet


@click.group()
def main():
    """Preference-based global optimization."""


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")


@main.command()
@click.option("--problem", default="all", help="benchmark name or 'all'")
@click.option(
    "--variant",
    default="glispr",
    help="acquisition variant: glispr, glisp, cglisp, or 'all'",
)
@click.option("--trials", default=10, show_default=True, help="runs per problem/variant")
@click.option("--budget", default=60, show_default=True, help="total samples per run")
@click.option("--n-init", default=None, type=int, help="initial design size (default 4n)")
@click.option("--seed", default=0, show_default=True, help="base random seed")
@click.option(
    "--delta-cycle",
    default="0.95,0.7,0.35,0",
    show_default=True,
    help="comma-separated trade-off cycling sequence",
)
@click.option("--k-aug", default=5, show_default=True, help="clusters for the augmented set")
@click.option("--threshold", default=0.95, show_default=True, help="solved-accuracy threshold")
@click.option("--workers", default=1, show_default=True, help="parallel trial workers")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="output directory")
def bench(problem, variant, trials, budget, n_init, seed, delta_cycle, k_aug, threshold, workers, out):
    """Run synthetic-oracle benchmark campaigns and write reports."""
    problems = benchmark_catalog() if problem == "all" else [get_problem(problem)]
    if variant == "all":
        variants = list(Variant)
    else:
        try:
            variants = [Variant(variant)]
        except ValueError:
            raise click.BadParameter(f"unknown variant {variant!r}")
    cfg = SolverConfig(
        n_init=n_init,
        n_max=budget,
        seed=seed,
        delta_cycle=_parse_floats(delta_cycle),
        k_aug=k_aug,
    )
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = run_campaign(problems, variants, trials, cfg, workers=workers)
    f_stars = {p.name: p.f_star for p in problems}
    write_csv(records, out_dir / "records.csv", f_stars)
    write_summary(records, out_dir / "summary.json", f_stars, threshold)
    write_plots(records, out_dir, f_stars, threshold)
    click.echo(f"wrote {len(records)} run records to {out_dir}")


class _StdinOracle:
    """Interactive oracle: prints both candidates, reads -1/0/1 answers."""

    def __init__(self, names):
        self.names = names
        self.count = 0

    def query(self, xi, xj) -> int:
        self.count += 1
        click.echo(f"\nquery {self.count}: which tuning is better?")
        for label, vec in (("(a) first ", xi), ("(b) second", xj)):
            rendered = ", ".join(
                f"{name}={value:.4g}" for name, value in zip(self.names, vec)
            )
            click.echo(f"  {label}: {rendered}")
        while True:
            raw = click.prompt("answer [a/b/tie or -1/1/0]", type=str).strip().lower()
            mapping = {"a": -1, "-1": -1, "b": 1, "1": 1, "tie": 0, "t": 0, "0": 0}
            if raw in mapping:
                return mapping[raw]
            click.echo("please answer 'a', 'b' or 'tie'")


@main.command("solve")
@click.option("--lower", required=True, help="comma-separated lower bounds")
@click.option("--upper", required=True, help="comma-separated upper bounds")
@click.option("--names", default=None, help="comma-separated variable names")
@click.option("--budget", default=20, show_default=True)
@click.option("--n-init", default=None, type=int)
@click.option("--seed", default=0, show_default=True)
def solve_cmd(lower, upper, names, budget, n_init, seed):
    """Run one interactive session answering queries on stdin."""
    lo = np.array(_parse_floats(lower))
    hi = np.array(_parse_floats(upper))
    if names is None:
        name_list = [f"x{i + 1}" for i in range(lo.size)]
    else:
        name_list = [tok.strip() for tok in names.split(",")]
    problem = ConstraintSet(lo, hi)
    cfg = SolverConfig(n_init=n_init, n_max=budget, seed=seed)
    oracle = _StdinOracle(name_list)
    result = solve(problem, oracle, cfg)
    click.echo("\nbest tuning found:")
    rendered = ", ".join(
        f"{name}={value:.6g}" for name, value in zip(name_list, result.x_best)
    )
    click.echo(f"  {rendered}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8008, show_default=True)
@click.option("--data-dir", default="./pbo-sessions", show_default=True)
@click.option("--default-budget", default=40, show_default=True)
def serve(host, port, data_dir, default_budget):
    """Serve the live-session HTTP API."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(data_dir, default_budget), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
