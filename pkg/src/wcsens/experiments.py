"""End-to-end experiment pipelines behind the ``experiment`` subcommand.

* inventory: seeded exponential-mixture demand, SAA vs. robust order
  quantities, a chi-square mean-sensitivity frontier, cost histograms;
* portfolio: minimum robust-CVaR weights on a returns matrix (a seeded
  synthetic one by default), cross-sensitivity frontiers for the total
  variation, budgeted and chi-square families.

Every artifact is deterministic given the seed: fixed float formatting, no
timestamps.
"""

from __future__ import annotations

import os
from typing import Dict, List, Optional, Sequence

import numpy as np

from .dro import (
    FrontierPoint,
    frontier,
    induced_cost_distribution,
    solve_scalar,
    solve_simplex,
)
from .models import (
    InventoryParams,
    ReturnsMatrix,
    exp_mixture_demand,
    inventory_problem,
    portfolio_problem,
    synthetic_returns,
)
from .output import (
    frontier_csv_rows,
    histogram_rows,
    scatter_svg,
    write_csv,
    write_json,
)
from .rcvar import rcvar_sensitivity
from .sets import Budgeted, ConvexComb, SmoothPhi, Symmetric, TV

DEFAULT_MEASURES = (SmoothPhi(), TV(), Budgeted(), ConvexComb(0.9), Symmetric())


def interpolate_at(xs: Sequence[float], ys: Sequence[float], x: float) -> float:
    """Linear interpolation after sorting by x; clips outside the range."""
    order = np.argsort(xs)
    xs = np.asarray(xs, dtype=float)[order]
    ys = np.asarray(ys, dtype=float)[order]
    return float(np.interp(x, xs, ys))


def sensitivity_at_nominal(
    points: List[FrontierPoint], measure_label: str, nominal: float
) -> float:
    """Score a solved family at a matched nominal level by interpolation."""
    ok = [p for p in points if p.error is None]
    return interpolate_at(
        [p.nominal for p in ok], [p.sensitivities[measure_label] for p in ok], nominal
    )


def run_inventory(
    seed: int = 7,
    out_dir: Optional[str] = None,
    n_demands: int = 100,
    eps_chi2: float = 1.7,
    eps_budgeted: float = 0.45,
    frontier_grid: Optional[Sequence[float]] = None,
    write_svg: bool = False,
) -> Dict:
    """Seeded inventory pipeline; returns the summary dict."""
    params = InventoryParams(r=10.0, c=2.0, q=0.0, s=4.0)
    demands = exp_mixture_demand(n_demands, 10.0, 100.0, 0.9, seed)
    prob = inventory_problem(params, demands)
    chi2 = SmoothPhi()

    sol_saa = solve_scalar(prob, chi2, 0.0)
    sol_chi2 = solve_scalar(prob, chi2, eps_chi2)
    sol_budg = solve_scalar(prob, Budgeted(), eps_budgeted)

    if frontier_grid is None:
        frontier_grid = np.concatenate([[0.0], np.geomspace(1e-3, eps_chi2, 12)])
    points = frontier(prob, chi2, frontier_grid, list(DEFAULT_MEASURES))

    def describe(x: float) -> Dict:
        d = induced_cost_distribution(prob, x)
        return {
            "x": float(x),
            "mean_cost": d.mean(),
            "stdev_cost": d.stdev(),
            "chi2_sensitivity": float(np.sqrt(2.0 * d.variance())),
            "budgeted_sensitivity": d.mean() - d.min(),
        }

    summary = {
        "model": "inventory",
        "seed": seed,
        "params": {"r": params.r, "c": params.c, "q": params.q, "s": params.s},
        "n_demands": n_demands,
        "saa": describe(sol_saa.x),
        "chi2": {"eps": eps_chi2, **describe(sol_chi2.x)},
        "budgeted": {"eps": eps_budgeted, **describe(sol_budg.x)},
    }
    summary["ordering_budgeted_saa_chi2"] = [
        summary["budgeted"]["x"],
        summary["saa"]["x"],
        summary["chi2"]["x"],
    ]

    artifacts = {
        "frontier_chi2.csv": frontier_csv_rows(points),
        "hist_saa.csv": histogram_rows(induced_cost_distribution(prob, sol_saa.x)),
        "hist_chi2.csv": histogram_rows(induced_cost_distribution(prob, sol_chi2.x)),
        "hist_budgeted.csv": histogram_rows(induced_cost_distribution(prob, sol_budg.x)),
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for name, rows in artifacts.items():
            write_csv(os.path.join(out_dir, name), rows)
        write_json(os.path.join(out_dir, "summary.json"), summary)
        if write_svg:
            ok = [p for p in points if p.error is None]
            scatter_svg(
                os.path.join(out_dir, "frontier_chi2.svg"),
                [
                    (
                        "chi2",
                        [p.nominal for p in ok],
                        [p.sensitivities["modified_chi2"] for p in ok],
                    )
                ],
                "mean cost",
                "chi2 sensitivity",
                "inventory mean-sensitivity frontier",
            )
    summary["frontier_points"] = points
    return summary


PORTFOLIO_GRIDS = {
    "tv": np.concatenate([[0.0], np.linspace(0.004, 0.06, 8)]),
    "budgeted": np.concatenate([[0.0], np.linspace(0.05, 0.7, 8)]),
    "modified_chi2": np.concatenate([[0.0], np.geomspace(3e-4, 0.03, 8)]),
}


def run_portfolio(
    seed: int = 7,
    out_dir: Optional[str] = None,
    returns: Optional[ReturnsMatrix] = None,
    beta: float = 0.9,
    grids: Optional[Dict[str, Sequence[float]]] = None,
    solver_kwargs: Optional[Dict] = None,
    write_svg: bool = False,
) -> Dict:
    """Robust minimum-CVaR portfolio pipeline; returns the summary dict."""
    if returns is None:
        returns = synthetic_returns(1000, 30, seed)
    prob = portfolio_problem(returns, beta)
    grids = grids or PORTFOLIO_GRIDS
    solver_kwargs = dict(solver_kwargs or {"restarts": 4, "iters": 250, "seed": seed})

    families = {"tv": TV(), "budgeted": Budgeted(), "modified_chi2": SmoothPhi()}
    measures = [TV(), Budgeted(), SmoothPhi()]
    frontiers: Dict[str, List[FrontierPoint]] = {}
    for name, spec in families.items():
        frontiers[name] = frontier(
            prob, spec, grids[name], measures, solver_kwargs=solver_kwargs
        )

    saa = solve_simplex(prob, TV(), 0.0, **solver_kwargs)
    d_saa = induced_cost_distribution(prob, saa.x)
    summary = {
        "model": "portfolio",
        "seed": seed,
        "beta": beta,
        "n_scenarios": returns.n_scenarios,
        "n_assets": returns.n_assets,
        "saa_cvar": d_saa.cvar(beta),
        "saa_tv_sensitivity": rcvar_sensitivity(d_saa, beta, TV()).value,
        "saa_budgeted_sensitivity": rcvar_sensitivity(d_saa, beta, Budgeted()).value,
    }

    artifacts = {
        f"frontier_{name}.csv": frontier_csv_rows(pts, nominal_name="cvar")
        for name, pts in frontiers.items()
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for name, rows in artifacts.items():
            write_csv(os.path.join(out_dir, name), rows)
        write_json(os.path.join(out_dir, "summary.json"), summary)
        if write_svg:
            for label in ("tv", "budgeted"):
                series = []
                for name, pts in frontiers.items():
                    ok = [p for p in pts if p.error is None]
                    series.append(
                        (
                            name,
                            [p.nominal for p in ok],
                            [p.sensitivities[label] for p in ok],
                        )
                    )
                scatter_svg(
                    os.path.join(out_dir, f"frontier_{label}_score.svg"),
                    series,
                    "nominal cvar",
                    f"{label} sensitivity",
                    f"cvar vs {label} sensitivity",
                )
    summary["frontiers"] = frontiers
    return summary
