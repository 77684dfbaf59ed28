"""Robust decision problems: scalar and simplex solvers, frontier sweeps.

A decision problem couples a scenario set with a cost oracle f(x, Y) and a
decision domain.  Solvers minimize the worst-case objective (mean or CVaR)
at a given set size:

* scalar decisions: coarse grid over the interval followed by golden-section
  refinement of the best bracket (cost profiles here are piecewise linear in
  x, so bracket refinement is safe);
* simplex decisions: projected subgradient with exact worst-case weights
  (the maximizing weights make the subgradient exact for costs affine in x),
  random restarts, and a pairwise-exchange polish.

``frontier`` traces (set size, decision, nominal value, sensitivities) rows
used to pick the family and size of the uncertainty set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from .dist import DiscreteDistribution, RiskLevel, _as_level
from .errors import DomainError, SolverError, UnsupportedFamilyError
from .rcvar import rcvar_sensitivity, rcvar_value, rcvar_worst_weights
from .sets import Growth, SmoothPhi
from .worstcase import sensitivity, worst_case

_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class IntervalDomain:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"decision interval [{self.lo}, {self.hi}] is empty")


@dataclass(frozen=True)
class SimplexDomain:
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("simplex domain needs dimension >= 1")


@dataclass(frozen=True)
class MeanObjective:
    label = "mean"


@dataclass(frozen=True)
class CVaRObjective:
    beta: RiskLevel

    def __post_init__(self):
        if not isinstance(self.beta, RiskLevel):
            object.__setattr__(self, "beta", RiskLevel(float(self.beta)))

    @property
    def label(self) -> str:
        return f"cvar_{self.beta.alpha:g}"


@dataclass
class DecisionProblem:
    """Scenario set with a cost oracle and a decision domain.

    ``cost(x, Y)`` must accept the full scenario array and return the cost
    vector; ``cost_jac(x)``, returning the (n, d) per-scenario gradient, is
    required only by the simplex solver.
    """

    scenario_values: np.ndarray
    probs: np.ndarray
    cost: Callable
    domain: Union[IntervalDomain, SimplexDomain]
    objective: Union[MeanObjective, CVaRObjective] = field(default_factory=MeanObjective)
    cost_jac: Optional[Callable] = None

    def __post_init__(self):
        self.scenario_values = np.asarray(self.scenario_values, dtype=float)
        # validates lengths/positivity once; scenario values may be vectors
        marginal = (
            self.scenario_values
            if self.scenario_values.ndim == 1
            else self.scenario_values[:, 0]
        )
        self._scenario_dist = DiscreteDistribution(marginal, self.probs)
        self.probs = self._scenario_dist.probs

    def costs(self, x) -> np.ndarray:
        c = np.asarray(self.cost(x, self.scenario_values), dtype=float)
        if c.shape != (self.probs.size,):
            raise DomainError(
                f"cost oracle returned shape {c.shape}, expected ({self.probs.size},)"
            )
        return c


def induced_cost_distribution(prob: DecisionProblem, x) -> DiscreteDistribution:
    """Distribution of f(x, Y) over the scenario probabilities."""
    return DiscreteDistribution(prob.costs(x), prob.probs)


def _objective_value(prob: DecisionProblem, spec, eps: float, x, exact: bool = True) -> float:
    """Worst-case objective at decision x.

    With ``exact=False`` the robust CVaR for TV / band families is evaluated
    through the greedy primal weights (same value, O(n log n)) instead of
    the dual breakpoint enumeration; solvers use the fast path internally.
    """
    d = induced_cost_distribution(prob, x)
    if isinstance(prob.objective, MeanObjective):
        if eps == 0.0:
            return d.mean()
        return worst_case(d, spec, eps).value
    beta = prob.objective.beta.alpha
    if eps == 0.0:
        return d.cvar(beta)
    if isinstance(spec, SmoothPhi) or exact:
        return rcvar_value(d, beta, spec, eps).value
    return float(rcvar_worst_weights(d, beta, spec, eps) @ d.values)


def _golden_min(fun, a: float, b: float, tol: float) -> tuple:
    x1 = b - _GOLD * (b - a)
    x2 = a + _GOLD * (b - a)
    f1, f2 = fun(x1), fun(x2)
    while b - a > tol:
        if f1 > f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLD * (b - a)
            f2 = fun(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLD * (b - a)
            f1 = fun(x1)
    return (x1, f1) if f1 <= f2 else (x2, f2)


@dataclass
class ScalarSolution:
    x: float
    value: float


def solve_scalar(
    prob: DecisionProblem,
    spec,
    eps: float,
    bracket_grid_size: int = 512,
    tol: float = 1e-8,
) -> ScalarSolution:
    """Grid scan plus golden-section refinement over an interval domain."""
    if not isinstance(prob.domain, IntervalDomain):
        raise DomainError("solve_scalar requires an interval decision domain")
    lo, hi = prob.domain.lo, prob.domain.hi

    def fun(x):
        return _objective_value(prob, spec, eps, float(x), exact=False)

    grid = np.linspace(lo, hi, bracket_grid_size)
    values = np.array([fun(x) for x in grid])
    i = int(np.argmin(values))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, bracket_grid_size - 1)]
    x_ref, v_ref = _golden_min(fun, float(a), float(b), tol)
    if values[i] <= v_ref:
        x_ref, v_ref = float(grid[i]), float(values[i])
    return ScalarSolution(float(x_ref), _objective_value(prob, spec, eps, float(x_ref)))


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u + (1.0 - css) / np.arange(1, v.size + 1) > 0)[0][-1]
    lam = (1.0 - css[rho]) / (rho + 1.0)
    return np.maximum(v + lam, 0.0)


def _subgradient(prob: DecisionProblem, spec, eps: float, x: np.ndarray) -> np.ndarray:
    d = induced_cost_distribution(prob, x)
    jac = np.asarray(prob.cost_jac(x), dtype=float)
    if isinstance(prob.objective, MeanObjective):
        q = d.probs if eps == 0.0 else worst_case(d, spec, eps).weights
        return jac.T @ q

    beta = prob.objective.beta.alpha
    if not isinstance(spec, SmoothPhi):
        q = d._cvar_weights_any(beta) if eps == 0.0 else rcvar_worst_weights(d, beta, spec, eps)
        return jac.T @ q

    # smooth-divergence robust CVaR approximation: CVaR + sqrt(eps) * slope.
    # Gradient = CVaR tail weights plus the chain rule through the standard
    # deviation of the tail excess (VaR atom held as the anchor).
    q = d._cvar_weights_any(beta)
    g = jac.T @ q
    if eps > 0.0:
        var_level = d.var_quantile(beta)
        t = np.maximum(d.values - var_level, 0.0)
        sigma = math.sqrt(max(float(d.probs @ t**2) - float(d.probs @ t) ** 2, 0.0))
        if sigma > 1e-14:
            anchor = int(d.order[d._tail_index(1.0 - beta)])
            w = d.probs * (t - float(d.probs @ t)) / sigma
            active = t > 0.0
            g_sigma = (jac[active] - jac[anchor]).T @ w[active]
            g = g + math.sqrt(2.0 * eps / spec.phi_dd) / (1.0 - beta) * g_sigma
    return g


@dataclass
class SimplexSolution:
    x: np.ndarray
    value: float
    subgrad_norm: float
    certificate: float  # best feasible worst-case value seen across restarts


def solve_simplex(
    prob: DecisionProblem,
    spec,
    eps: float,
    step_schedule: tuple = (0.5, 10.0),
    iters: int = 250,
    restarts: int = 20,
    seed: int = 0,
    x0: Optional[np.ndarray] = None,
    polish: bool = True,
) -> SimplexSolution:
    """Projected subgradient over the simplex with restarts and polish.

    Steps follow a/(b+t) from ``step_schedule``; each candidate's exact
    objective is tracked so the returned value is the best feasible one
    (its own optimality certificate).  A pairwise mass-exchange polish with
    golden-section line searches sharpens the best point.
    """
    if not isinstance(prob.domain, SimplexDomain):
        raise DomainError("solve_simplex requires a simplex decision domain")
    if prob.cost_jac is None:
        raise UnsupportedFamilyError(
            "solve_simplex needs cost_jac (cost affine in the decision)"
        )
    dim = prob.domain.dim
    a_step, b_step = step_schedule

    def fun(x):
        return _objective_value(prob, spec, eps, x, exact=False)

    rng = np.random.default_rng(seed)
    starts = [np.full(dim, 1.0 / dim)]
    if x0 is not None:
        starts.append(project_simplex(np.asarray(x0, dtype=float)))
    while len(starts) < restarts:
        starts.append(rng.dirichlet(np.ones(dim)))

    best_x = starts[0]
    best_val = fun(best_x)
    for x_start in starts:
        x = x_start.copy()
        val = fun(x)
        if val < best_val:
            best_x, best_val = x.copy(), val
        stall_floor = val
        for t in range(iters):
            g = _subgradient(prob, spec, eps, x)
            gnorm = float(np.linalg.norm(g))
            if gnorm <= 1e-14:
                break
            x = project_simplex(x - a_step / (b_step + t) * g / gnorm)
            val = fun(x)
            if val < best_val:
                best_x, best_val = x.copy(), val
            if val > 1e6 * max(1.0, abs(stall_floor)):
                raise SolverError(
                    "subgradient iteration diverged",
                    trace={"eps": eps, "iter": t, "value": val},
                )

    if polish:
        best_x, best_val = _pairwise_polish(fun, best_x, best_val)
    g_final = _subgradient(prob, spec, eps, best_x)
    exact_val = _objective_value(prob, spec, eps, best_x)
    return SimplexSolution(
        best_x, float(exact_val), float(np.linalg.norm(g_final)), float(best_val)
    )


def _pairwise_polish(fun, x: np.ndarray, val: float, passes: int = 2, top: int = 8):
    """Golden-section line searches along e_j - e_i for promising pairs."""
    for _ in range(passes):
        improved = False
        coords = np.argsort(x)[::-1][:top]
        for i in coords:
            for j in coords:
                if i == j or x[i] <= 1e-12:
                    continue

                def line(t, i=i, j=j):
                    z = x.copy()
                    z[i] -= t
                    z[j] += t
                    return fun(z)

                t_best, v_best = _golden_min(line, 0.0, float(x[i]), 1e-9)
                if v_best < val - 1e-12:
                    x = x.copy()
                    x[i] -= t_best
                    x[j] += t_best
                    val = v_best
                    improved = True
        if not improved:
            break
    return x, val


@dataclass
class FrontierPoint:
    eps: float
    decision: Union[float, np.ndarray]
    nominal: float
    sensitivities: Dict[str, float]
    error: Optional[str] = None


def measure_sensitivities(
    d: DiscreteDistribution, objective, measures: Sequence
) -> Dict[str, float]:
    out = {}
    for spec in measures:
        if isinstance(objective, MeanObjective):
            out[spec.label] = sensitivity(d, spec).value
        else:
            out[spec.label] = rcvar_sensitivity(d, objective.beta, spec).value
    return out


def frontier(
    prob: DecisionProblem,
    solve_spec,
    eps_grid: Sequence[float],
    measures: Sequence,
    solver_kwargs: Optional[dict] = None,
) -> List[FrontierPoint]:
    """Solve the robust problem along eps_grid and score each solution.

    Sensitivities are computed on the induced cost distribution of that
    size's optimal decision.  Failures are recorded on the point and the
    sweep continues.  Simplex solves are warm-started from the previous
    point.
    """
    eps_grid = [float(e) for e in eps_grid]
    if any(b <= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise DomainError("eps grid must be strictly increasing")
    if not measures:
        raise DomainError("at least one sensitivity measure is required")
    solver_kwargs = dict(solver_kwargs or {})
    points: List[FrontierPoint] = []
    x_prev = None
    for eps in eps_grid:
        try:
            if isinstance(prob.domain, IntervalDomain):
                sol = solve_scalar(prob, solve_spec, eps, **solver_kwargs)
                decision = sol.x
            else:
                sol = solve_simplex(prob, solve_spec, eps, x0=x_prev, **solver_kwargs)
                decision = sol.x
                x_prev = sol.x
            d = induced_cost_distribution(prob, decision)
            nominal = (
                d.mean()
                if isinstance(prob.objective, MeanObjective)
                else d.cvar(prob.objective.beta)
            )
            points.append(
                FrontierPoint(
                    eps,
                    decision,
                    float(nominal),
                    measure_sensitivities(d, prob.objective, measures),
                )
            )
        except (DomainError, SolverError, UnsupportedFamilyError) as exc:
            points.append(FrontierPoint(eps, float("nan"), float("nan"), {}, str(exc)))
    return points


def default_eps_grid(spec, n_points: int, lo: float, hi: float) -> np.ndarray:
    """Geometric grid for sqrt-growth families, arithmetic for linear ones."""
    if getattr(spec, "growth", Growth.LINEAR) is Growth.SQRT:
        return np.geomspace(lo, hi, n_points)
    return np.linspace(lo, hi, n_points)
