"""Comparison constants between sensitivity measures on uniform atoms.

For n equally weighted atoms the CVaR deviation is bounded by a sharp
multiple of the standard deviation:

    CVaR_alpha(f) - mean(f) <= C(alpha, n) * stdev(f),
    C(alpha, n) = sqrt(n {floor(k) + (k - floor(k))^2} - k^2) / k,
    k = n (1 - alpha),

with equality attained by an explicit three-level vector.  The constant
never exceeds sqrt(alpha / (1 - alpha)) (equality when k is an integer).
These bounds order the sensitivity measures of the weight-space families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import DiscreteDistribution, _as_level
from .errors import DomainError
from .sets import Budgeted, ConvexComb, SmoothPhi, TV
from .worstcase import sensitivity

_UNIFORM_TOL = 1e-12


def c_alpha_n(alpha, n: int) -> float:
    alpha = _as_level(alpha)
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    kappa = n * (1.0 - alpha)
    if kappa <= 0.0:
        raise DomainError(f"n (1 - alpha) must be positive, got {kappa}")
    k = math.floor(kappa)
    inner = n * (k + (kappa - k) ** 2) - kappa * kappa
    return math.sqrt(max(inner, 0.0)) / kappa


def extremal_vector(alpha, n: int) -> DiscreteDistribution:
    """Uniform-probability vector attaining the CVaR-deviation/stdev bound.

    Three levels: the k largest entries share one value, the pivotal entry
    interpolates, the rest share a common negative value.  Degenerate
    requests (kappa = n, i.e. alpha = 0) would give the zero vector and are
    rejected.
    """
    alpha = _as_level(alpha)
    if n < 2:
        raise DomainError("extremal vector needs n >= 2")
    kappa = n * (1.0 - alpha)
    k = math.floor(kappa)
    if k >= n:
        raise DomainError(
            f"alpha={alpha:g} gives kappa=n: the extremal vector degenerates to zero"
        )
    denom = n * (k + (kappa - k) ** 2) - kappa * kappa
    z = np.empty(n)
    z[:k] = kappa * (n - kappa) / denom
    z[k] = (-kappa * kappa + n * kappa * (kappa - k)) / denom
    z[k + 1 :] = -kappa * kappa / denom
    return DiscreteDistribution.uniform(z)


@dataclass
class DominanceRecord:
    """Bound checks between sensitivity measures; all hold for valid input."""

    smooth_vs_tv: bool
    convex_comb_vs_smooth: bool
    budgeted_vs_smooth: bool
    stdev: float
    tv_sensitivity: float
    budgeted_sensitivity: float

    def all_hold(self) -> bool:
        return self.smooth_vs_tv and self.convex_comb_vs_smooth and self.budgeted_vs_smooth

    def to_json_dict(self) -> dict:
        return {
            "smooth_vs_tv": self.smooth_vs_tv,
            "convex_comb_vs_smooth": self.convex_comb_vs_smooth,
            "budgeted_vs_smooth": self.budgeted_vs_smooth,
            "stdev": self.stdev,
            "tv_sensitivity": self.tv_sensitivity,
            "budgeted_sensitivity": self.budgeted_sensitivity,
            "all_hold": self.all_hold(),
        }


def check_dominance(d: DiscreteDistribution, phi_dd: float, alphas=None) -> DominanceRecord:
    """Verify the ordering of sensitivity measures on uniform probabilities.

    Checks, with S_phi the smooth-divergence sensitivity (so
    sqrt(phi''/2) S_phi = stdev):

    * stdev <= TV sensitivity (half range);
    * CVaR deviation at each alpha <= C(alpha, n) * stdev;
    * budgeted sensitivity (mean - min) <= sqrt(n - 1) * stdev.

    A failing flag indicates a library bug, not a property of the input.
    Non-uniform probabilities are rejected: the constants assume 1/n atoms.
    """
    if np.max(np.abs(d.probs - 1.0 / d.n)) > _UNIFORM_TOL:
        raise DomainError("dominance constants require uniform probabilities")
    alphas = list(alphas) if alphas is not None else [j / 20.0 for j in range(1, 20)]
    tol = 1e-9 * max(1.0, d.range())
    spec = SmoothPhi(phi_dd=phi_dd)
    stdev_like = math.sqrt(phi_dd / 2.0) * sensitivity(d, spec).value  # = stdev
    s_tv = sensitivity(d, TV()).value
    s_budget = sensitivity(d, Budgeted()).value
    cc_ok = all(
        sensitivity(d, ConvexComb(a)).value <= c_alpha_n(a, d.n) * stdev_like + tol
        for a in alphas
    )
    budget_bound = math.sqrt(max(d.n - 1, 1)) * stdev_like
    return DominanceRecord(
        smooth_vs_tv=bool(stdev_like <= s_tv + tol),
        convex_comb_vs_smooth=bool(cc_ok),
        budgeted_vs_smooth=bool(s_budget <= budget_bound + tol),
        stdev=float(stdev_like),
        tv_sensitivity=float(s_tv),
        budgeted_sensitivity=float(s_budget),
    )
