"""Worst-case sensitivity analysis and DRO frontier tracing for discrete
cost distributions."""

from .bayes import (
    MixtureModel,
    likelihood_sensitivity,
    mixture_mean,
    nested_worst_case_check,
    penalty_sensitivities,
    posterior_sensitivity,
)
from .bounds import c_alpha_n, check_dominance, extremal_vector
from .dist import DiscreteDistribution, RiskLevel, load_distribution_csv
from .dro import (
    CVaRObjective,
    DecisionProblem,
    FrontierPoint,
    IntervalDomain,
    MeanObjective,
    SimplexDomain,
    default_eps_grid,
    frontier,
    induced_cost_distribution,
    solve_scalar,
    solve_simplex,
)
from .errors import (
    DataFormatError,
    DegeneracyWarning,
    DistributionError,
    DomainError,
    SolverError,
    UnsupportedFamilyError,
    WcsError,
)
from .models import (
    InventoryParams,
    ReturnsMatrix,
    exp_mixture_demand,
    inventory_cost_oracle,
    inventory_problem,
    load_returns_csv,
    portfolio_problem,
    synthetic_returns,
)
from .rcvar import rcvar_sensitivity, rcvar_value, rcvar_worst_weights
from .sets import (
    Budgeted,
    ConvexComb,
    Growth,
    PhiKind,
    SmoothPhi,
    Symmetric,
    TV,
    Wasserstein,
    WorstCaseResult,
)
from .wasserstein import (
    Candidates,
    CostOracle,
    Interval,
    WassersteinSensitivity,
    wasserstein_sensitivity,
    wasserstein_value_first_order,
)
from .worstcase import (
    budgeted_slope,
    finite_difference_slope,
    penalty_sensitivity,
    sensitivity,
    worst_case,
)

__all__ = [name for name in dir() if not name.startswith("_")]
