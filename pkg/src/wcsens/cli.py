"""Command-line surface: sensitivities, worst cases, frontiers, experiments.

Exit codes: 0 success, 1 computation failure, 2 usage error.  All output is
deterministic given the flags; no timestamps or environment lookups.
"""

from __future__ import annotations

import sys

import click
import numpy as np

from . import bounds as bounds_mod
from . import experiments
from .dist import load_distribution_csv
from .dro import default_eps_grid, frontier, measure_sensitivities
from .errors import WcsError
from .models import load_returns_csv, ReturnsMatrix
from .output import frontier_csv_rows, json_dumps, scatter_svg, write_csv
from .rcvar import rcvar_sensitivity, rcvar_value
from .sets import Budgeted, ConvexComb, PhiKind, SmoothPhi, Symmetric, TV
from .worstcase import sensitivity, worst_case

_FAMILY_NAMES = "modified-chi2, kl, tv, budgeted, convex-comb, symmetric"


def _build_spec(family: str, alpha, phi_dd):
    name = family.strip().lower().replace("_", "-")
    if name in ("modified-chi2", "chi2"):
        return SmoothPhi(PhiKind.MODIFIED_CHI2, phi_dd=phi_dd)
    if name == "kl":
        return SmoothPhi(PhiKind.KL, phi_dd=phi_dd)
    if name == "tv":
        return TV()
    if name == "budgeted":
        return Budgeted()
    if name == "convex-comb":
        if alpha is None:
            raise click.UsageError("--alpha is required for family convex-comb")
        return ConvexComb(alpha)
    if name == "symmetric":
        return Symmetric()
    raise click.UsageError(f"unknown family {family!r}; choose from {_FAMILY_NAMES}")


def _parse_grid(text):
    try:
        grid = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise click.UsageError(f"--eps-grid must be comma-separated numbers, got {text!r}")
    if not grid:
        raise click.UsageError("--eps-grid is empty")
    return grid


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        click.echo(json_dumps(payload))
    else:
        keys = sorted(payload)
        click.echo(",".join(keys))
        click.echo(",".join(str(payload[k]) for k in keys))


class _Failure(click.ClickException):
    exit_code = 1


@click.group()
def main():
    """Worst-case sensitivity analysis for discrete cost distributions."""


@main.command("sensitivity")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--family", required=True, help=f"one of: {_FAMILY_NAMES}")
@click.option("--alpha", type=float, default=None, help="tail level for convex-comb")
@click.option("--beta", type=float, default=None, help="report CVaR_beta sensitivity instead of the mean's")
@click.option("--phi-dd", type=float, default=1.0, help="phi''(1) for smooth families")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def sensitivity_cmd(input_path, family, alpha, beta, phi_dd, fmt):
    """Worst-case sensitivity of a distribution under one family."""
    spec = _build_spec(family, alpha, phi_dd)
    try:
        d = load_distribution_csv(input_path)
        if beta is None:
            res = sensitivity(d, spec)
        else:
            res = rcvar_sensitivity(d, beta, spec)
    except WcsError as exc:
        raise _Failure(str(exc))
    payload = {"family": spec.label, "value": res.value, "growth": res.growth.value}
    if beta is not None:
        payload["beta"] = beta
    _emit(payload, fmt)


@main.command("worst-case")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--family", required=True, help=f"one of: {_FAMILY_NAMES}")
@click.option("--eps", required=True, type=float)
@click.option("--alpha", type=float, default=None)
@click.option("--beta", type=float, default=None, help="compute robust CVaR_beta instead of the mean")
@click.option("--phi-dd", type=float, default=1.0)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def worst_case_cmd(input_path, family, eps, alpha, beta, phi_dd, fmt):
    """Worst-case value and weights at a given set size."""
    spec = _build_spec(family, alpha, phi_dd)
    try:
        d = load_distribution_csv(input_path)
        if beta is None:
            res = worst_case(d, spec, eps)
        else:
            res = rcvar_value(d, beta, spec, eps)
    except WcsError as exc:
        raise _Failure(str(exc))
    if fmt == "json":
        click.echo(json_dumps(res.to_json_dict()))
    else:
        payload = {"family": res.family, "eps": res.eps, "value": res.value}
        _emit(payload, "csv")


@main.command("frontier")
@click.option("--model", required=True, type=click.Choice(["inventory", "portfolio", "custom"]))
@click.option("--families", required=True, help="comma-separated family names")
@click.option("--eps-grid", default=None, help="comma-separated set sizes")
@click.option("--seed", type=int, default=0)
@click.option("--n-demands", type=int, default=100, help="inventory sample size")
@click.option("--returns", "returns_path", type=click.Path(exists=True), default=None)
@click.option("--synthetic", is_flag=True, help="portfolio: use the seeded synthetic returns matrix")
@click.option("--returns-scale", type=click.Choice(["as-is", "percent"]), default="as-is")
@click.option("--alpha", type=float, default=None)
@click.option("--beta", type=float, default=0.9, help="portfolio CVaR level")
@click.option("--phi-dd", type=float, default=1.0)
@click.option("--input", "input_path", type=click.Path(exists=True), default=None, help="custom: distribution CSV")
@click.option("--out", required=True, type=click.Path(), help="output CSV path")
@click.option("--svg", "svg_path", type=click.Path(), default=None, help="optional SVG plot path")
def frontier_cmd(
    model, families, eps_grid, seed, n_demands, returns_path, synthetic,
    returns_scale, alpha, beta, phi_dd, input_path, out, svg_path,
):
    """Sweep set sizes, solve the robust problem, emit the frontier table."""
    specs = [_build_spec(name, alpha, phi_dd) for name in families.split(",")]
    measures = list(experiments.DEFAULT_MEASURES)
    try:
        if model == "custom":
            if input_path is None:
                raise click.UsageError("--model custom requires --input dist.csv")
            d = load_distribution_csv(input_path)
            rows = [["family", "eps", "value"]]
            for spec in specs:
                grid = (
                    _parse_grid(eps_grid)
                    if eps_grid
                    else default_eps_grid(spec, 9, 1e-3, 0.5)
                )
                for e in grid:
                    rows.append([spec.label, f"{e:.12g}", f"{worst_case(d, spec, e).value:.12g}"])
            write_csv(out, rows)
            click.echo(f"wrote {out}")
            return

        if model == "inventory":
            from .models import InventoryParams, exp_mixture_demand, inventory_problem

            demands = exp_mixture_demand(n_demands, 10.0, 100.0, 0.9, seed)
            prob = inventory_problem(InventoryParams(), demands)
            solver_kwargs = {}
        else:
            if returns_path is not None:
                returns = load_returns_csv(returns_path)
                if returns_scale == "percent":
                    returns = ReturnsMatrix(returns.rows / 100.0, returns.assets)
            elif synthetic:
                from .models import synthetic_returns

                returns = synthetic_returns(seed=seed)
            else:
                raise click.UsageError(
                    "portfolio frontier needs --returns FILE (or --synthetic "
                    "for the seeded demo matrix)"
                )
            from .models import portfolio_problem

            prob = portfolio_problem(returns, beta)
            solver_kwargs = {"restarts": 4, "iters": 250, "seed": seed}

        all_points = []
        series = []
        for spec in specs:
            grid = (
                _parse_grid(eps_grid)
                if eps_grid
                else default_eps_grid(spec, 9, 1e-3, 0.5)
            )
            pts = frontier(prob, spec, grid, measures, solver_kwargs=solver_kwargs)
            all_points.append((spec, pts))
            ok = [p for p in pts if p.error is None]
            series.append(
                (spec.label, [p.nominal for p in ok], [p.sensitivities[spec.label] for p in ok])
            )
        nominal_name = "mean" if model == "inventory" else "cvar"
        rows = [["family"] + frontier_csv_rows(all_points[0][1], nominal_name)[0]]
        for spec, pts in all_points:
            for row in frontier_csv_rows(pts, nominal_name)[1:]:
                rows.append([spec.label] + row)
        write_csv(out, rows)
        if svg_path:
            scatter_svg(svg_path, series, nominal_name, "own sensitivity")
        click.echo(f"wrote {out}")
    except click.UsageError:
        raise
    except WcsError as exc:
        raise _Failure(str(exc))


@main.command("experiment")
@click.argument("which", type=click.Choice(["inventory", "portfolio"]))
@click.option("--seed", type=int, default=7)
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--returns", "returns_path", type=click.Path(exists=True), default=None)
@click.option("--synthetic", is_flag=True, help="portfolio: use the seeded synthetic matrix")
@click.option("--returns-scale", type=click.Choice(["as-is", "percent"]), default="as-is")
@click.option("--svg", is_flag=True, help="also render SVG plots")
def experiment_cmd(which, seed, out_dir, returns_path, synthetic, returns_scale, svg):
    """Run a full pipeline and write frontier/histogram/summary files."""
    try:
        if which == "inventory":
            experiments.run_inventory(seed=seed, out_dir=out_dir, write_svg=svg)
        else:
            if returns_path is not None:
                returns = load_returns_csv(returns_path)
                if returns_scale == "percent":
                    returns = ReturnsMatrix(returns.rows / 100.0, returns.assets)
            elif synthetic:
                returns = None  # run_portfolio generates the seeded matrix
            else:
                raise click.UsageError(
                    "experiment portfolio needs --returns FILE with the rate-of-return "
                    "table (or --synthetic for the seeded demo matrix)"
                )
            experiments.run_portfolio(seed=seed, out_dir=out_dir, returns=returns, write_svg=svg)
    except click.UsageError:
        raise
    except WcsError as exc:
        raise _Failure(str(exc))
    click.echo(f"wrote artifacts to {out_dir}")


@main.command("bounds")
@click.option("--alpha", type=float, required=True)
@click.option("--n", "n_atoms", type=int, required=True)
@click.option("--input", "input_path", type=click.Path(exists=True), default=None,
              help="uniform-probability distribution for the dominance record")
@click.option("--phi-dd", type=float, default=1.0)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def bounds_cmd(alpha, n_atoms, input_path, phi_dd, fmt):
    """CVaR-deviation/stdev comparison constant and dominance checks."""
    try:
        payload = {"alpha": alpha, "n": n_atoms, "c_alpha_n": bounds_mod.c_alpha_n(alpha, n_atoms)}
        if input_path is not None:
            d = load_distribution_csv(input_path)
            payload["dominance"] = bounds_mod.check_dominance(d, phi_dd).to_json_dict()
    except WcsError as exc:
        raise _Failure(str(exc))
    if fmt == "json":
        click.echo(json_dumps(payload))
    else:
        flat = {k: v for k, v in payload.items() if not isinstance(v, dict)}
        _emit(flat, "csv")


if __name__ == "__main__":
    sys.exit(main())
