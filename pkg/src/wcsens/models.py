"""Built-in decision models: newsvendor-style inventory and CVaR portfolio.

Both are packaged as ready-made :class:`~wcsens.dro.DecisionProblem`
instances so the CLI and experiment pipelines share one code path.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .dist import RiskLevel
from .dro import CVaRObjective, DecisionProblem, IntervalDomain, MeanObjective, SimplexDomain
from .errors import DataFormatError, DomainError
from .wasserstein import CostOracle, Interval


@dataclass(frozen=True)
class InventoryParams:
    """Unit economics: sale price r, order cost c, salvage q, shortage s.

    Requires 0 <= q < c < r and s >= 0 so ordering is costly, selling
    profitable, and leftovers recover less than they cost.
    """

    r: float = 10.0
    c: float = 2.0
    q: float = 0.0
    s: float = 4.0

    def __post_init__(self):
        if not (0.0 <= self.q < self.c < self.r):
            raise DomainError(
                f"need 0 <= q < c < r, got q={self.q}, c={self.c}, r={self.r}"
            )
        if self.s < 0.0:
            raise DomainError(f"shortage penalty must be nonnegative, got {self.s}")


def inventory_cost(params: InventoryParams, x, y):
    """Negative selling reward plus ordering, salvage and shortage terms:

        -r min(x, Y) - q max(x - Y, 0) + s max(Y - x, 0) + c x
    """
    y = np.asarray(y, dtype=float)
    return (
        -params.r * np.minimum(x, y)
        - params.q * np.maximum(x - y, 0.0)
        + params.s * np.maximum(y - x, 0.0)
        + params.c * x
    )


def inventory_problem(
    params: InventoryParams, demands, probs=None
) -> DecisionProblem:
    demands = np.asarray(demands, dtype=float)
    if probs is None:
        probs = np.full(demands.size, 1.0 / demands.size)
    return DecisionProblem(
        scenario_values=demands,
        probs=probs,
        cost=lambda x, y: inventory_cost(params, x, y),
        domain=IntervalDomain(0.0, 1.5 * float(demands.max())),
        objective=MeanObjective(),
    )


def inventory_cost_oracle(params: InventoryParams, demands) -> CostOracle:
    """Scenario-space oracle for transport-metric sensitivity of the model."""
    demands = np.asarray(demands, dtype=float)
    return CostOracle(
        eval=lambda x, z: float(inventory_cost(params, x, np.asarray(z))),
        scenario_domain=Interval(0.0, 1.5 * float(demands.max())),
        norm="abs",
    )


def exp_mixture_demand(
    n: int, mu_low: float = 10.0, mu_high: float = 100.0, w_low: float = 0.9, seed: int = 0
) -> np.ndarray:
    """Demand sample from a two-component exponential mixture.

    Sampling is inverse-CDF on a PCG64 generator: one uniform picks the
    component (low-mean with probability w_low), a second is pushed through
    the exponential quantile -mu log(1 - u).  Deterministic given the seed.
    """
    if n < 1:
        raise DomainError("need at least one sample")
    if mu_low <= 0.0 or mu_high <= 0.0:
        raise DomainError("exponential means must be positive")
    if not (0.0 <= w_low <= 1.0):
        raise DomainError(f"mixture weight must lie in [0, 1], got {w_low}")
    rng = np.random.default_rng(seed)
    comp = rng.random(n)
    u = rng.random(n)
    mu = np.where(comp < w_low, mu_low, mu_high)
    return -mu * np.log1p(-u)


@dataclass(frozen=True)
class ReturnsMatrix:
    """Scenario-by-asset rate-of-return table."""

    rows: np.ndarray
    assets: List[str]

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            raise DataFormatError("returns matrix must be two-dimensional")
        if rows.shape[1] != len(self.assets):
            raise DataFormatError(
                f"{rows.shape[1]} columns for {len(self.assets)} asset names"
            )
        if not np.all(np.isfinite(rows)):
            raise DataFormatError("returns matrix contains non-finite entries")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n_scenarios(self) -> int:
        return self.rows.shape[0]

    @property
    def n_assets(self) -> int:
        return self.rows.shape[1]


def portfolio_problem(returns: ReturnsMatrix, beta) -> DecisionProblem:
    """Minimum robust-CVaR portfolio: cost is the loss -R x on the simplex."""
    beta = beta if isinstance(beta, RiskLevel) else RiskLevel(float(beta))
    rows = returns.rows
    return DecisionProblem(
        scenario_values=rows,
        probs=np.full(rows.shape[0], 1.0 / rows.shape[0]),
        cost=lambda x, y: -(y @ np.asarray(x, dtype=float)),
        domain=SimplexDomain(rows.shape[1]),
        objective=CVaRObjective(beta),
        cost_jac=lambda x: -rows,
    )


def load_returns_csv(path) -> ReturnsMatrix:
    """Read a returns table: header of asset names, one scenario per row."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    assets = [c.strip() for c in rows[0]]
    if not assets or any(not a for a in assets):
        raise DataFormatError(f"{path}: header row must name every asset")
    if len(rows) == 1:
        raise DataFormatError(f"{path}: no scenario rows after the header")
    data = np.empty((len(rows) - 1, len(assets)))
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(assets):
            raise DataFormatError(
                f"{path}: row {lineno} has {len(row)} fields, expected {len(assets)}"
            )
        for col, cell in enumerate(row, start=1):
            try:
                data[lineno - 2, col - 1] = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {lineno} column {col}: {cell!r} is not a number"
                ) from None
    return ReturnsMatrix(data, assets)


def save_returns_csv(path, returns: ReturnsMatrix) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(returns.assets)
        for row in returns.rows:
            writer.writerow([f"{x:.12g}" for x in row])


def synthetic_returns(
    n_scenarios: int = 1000, n_assets: int = 30, seed: int = 0
) -> ReturnsMatrix:
    """Seeded returns with a heavy right tail in losses.

    Assets trade mean return against crash exposure: market crashes hit the
    exposed half hard, and the most exposed names also carry rare
    idiosyncratic disasters.  This produces the spread of tail shapes that
    makes different uncertainty sets disagree.
    """
    rng = np.random.default_rng(seed)
    exposure = np.linspace(0.0, 1.0, n_assets)
    mu = 0.003 + 0.009 * exposure
    sig = 0.01 + 0.02 * exposure
    base = mu + sig * rng.standard_normal((n_scenarios, n_assets))
    crash = rng.random(n_scenarios) < 0.05
    crash_size = 0.02 + rng.exponential(0.06, n_scenarios)
    base -= np.outer(crash * crash_size, exposure)
    disaster = rng.random((n_scenarios, n_assets)) < 0.002 * exposure
    base -= disaster * (0.2 + rng.exponential(0.1, (n_scenarios, n_assets)))
    assets = [f"asset_{j:02d}" for j in range(n_assets)]
    return ReturnsMatrix(base, assets)
