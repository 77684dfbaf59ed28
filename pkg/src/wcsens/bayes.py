"""Posterior vs. likelihood sensitivity for finite mixture models.

A mixture assigns weight rho_j to component distribution L_j.  Under smooth
divergence balls of size eps (on rho) and delta (on each component), the
worst case of the nested problem

    max_{eta near rho} E_eta [ max_{Q near L_theta} E_Q f ]

expands as  mean + g(delta) * S_L + g(eps) * S_rho + o(.), splitting model
risk into two additive pieces:

* posterior sensitivity  S_rho = sqrt(2/phi'') * stdev_rho(component means)
  -- spread between components, eliminated when learning collapses rho;
* likelihood sensitivity S_L = sqrt(2/phi'') * E_rho[stdev of component]
  -- average spread inside components, which learning cannot remove.

Penalty-form analogues replace the standard deviations by variances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from .dist import DiscreteDistribution, PROB_TOL
from .errors import DistributionError, SolverError
from .sets import PhiKind, SmoothPhi
from .worstcase import worst_case


@dataclass(frozen=True)
class MixtureModel:
    weights: np.ndarray
    components: List[DiscreteDistribution]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise DistributionError("mixture needs at least one component weight")
        if w.size != len(self.components):
            raise DistributionError(
                f"{w.size} weights for {len(self.components)} components"
            )
        if np.any(w <= 0.0):
            raise DistributionError("mixture weights must be strictly positive")
        total = w.sum()
        if abs(total - 1.0) > PROB_TOL:
            raise DistributionError(f"mixture weights sum to {total!r}, not 1")
        w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def component_means(self) -> np.ndarray:
        return np.array([c.mean() for c in self.components])

    def component_stdevs(self) -> np.ndarray:
        return np.array([c.stdev() for c in self.components])


def mixture_mean(m: MixtureModel) -> float:
    return float(m.weights @ m.component_means())


def _weight_dist(m: MixtureModel, values: np.ndarray) -> DiscreteDistribution:
    return DiscreteDistribution(values, m.weights)


def posterior_sensitivity(m: MixtureModel, phi_dd: float) -> float:
    """Spread of the component means under the mixture weights."""
    if not phi_dd > 0.0:
        raise DistributionError(f"phi''(1) must be positive, got {phi_dd}")
    spread = _weight_dist(m, m.component_means()).stdev()
    return float(np.sqrt(2.0 / phi_dd) * spread)


def likelihood_sensitivity(m: MixtureModel, phi_dd: float) -> float:
    """Weight-averaged spread inside the components."""
    if not phi_dd > 0.0:
        raise DistributionError(f"phi''(1) must be positive, got {phi_dd}")
    return float(np.sqrt(2.0 / phi_dd) * (m.weights @ m.component_stdevs()))


def penalty_sensitivities(m: MixtureModel) -> tuple:
    """Penalty-form pair: (variance of component means, mean of component
    variances), the linear-growth analogues of the constraint-form slopes."""
    means = m.component_means()
    posterior = _weight_dist(m, means).variance()
    likelihood = float(m.weights @ np.array([c.variance() for c in m.components]))
    return float(posterior), likelihood


@dataclass
class NestedCheck:
    expansion: float
    nested_exact: float
    gap: float


def nested_worst_case_check(
    m: MixtureModel,
    phi_dd: float,
    eps: float,
    delta: float,
    kind: PhiKind = PhiKind.MODIFIED_CHI2,
) -> NestedCheck:
    """Compare the additive expansion against the exact nested worst case.

    The inner worst case runs per component at radius delta; its values form
    a derived distribution over components whose outer worst case runs at
    radius eps.  The gap is o(sqrt(eps)) + o(sqrt(delta)).
    """
    if eps < 0.0 or delta < 0.0:
        raise DistributionError("radii must be nonnegative")
    spec = SmoothPhi(kind=kind, phi_dd=phi_dd)
    inner_values = []
    for j, comp in enumerate(m.components):
        try:
            inner_values.append(worst_case(comp, spec, delta).value)
        except SolverError as exc:
            raise SolverError(
                f"inner worst case failed on component {j}: {exc}",
                residual=exc.residual,
            ) from exc
    outer = worst_case(_weight_dist(m, np.array(inner_values)), spec, eps).value
    expansion = (
        mixture_mean(m)
        + np.sqrt(delta) * likelihood_sensitivity(m, phi_dd)
        + np.sqrt(eps) * posterior_sensitivity(m, phi_dd)
    )
    return NestedCheck(float(expansion), float(outer), float(outer - expansion))
