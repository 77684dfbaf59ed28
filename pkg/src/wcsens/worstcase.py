"""Worst-case expected cost, worst-case weights, and mean sensitivities.

``sensitivity`` evaluates the closed-form slope of the worst-case value at
zero set size; ``worst_case`` produces the value and maximizing weights at a
finite size.  Families and their slopes:

=================  =======================================  ========
family             sensitivity of the mean                  growth
=================  =======================================  ========
smooth divergence  sqrt(2 Var(f) / phi''(1))                sqrt
total variation    (max f - min f) / 2                      linear
budgeted           mean f - min f                           linear
convex comb        CVaR_alpha(f) - mean f                   linear
symmetric band     CVaR_1/2(f) - mean f                     linear
=================  =======================================  ========
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import smooth
from .dist import DiscreteDistribution
from .errors import DomainError, UnsupportedFamilyError
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


class SensitivityValue(NamedTuple):
    value: float
    growth: Growth


def sensitivity(d: DiscreteDistribution, spec) -> SensitivityValue:
    """Slope of the worst-case expected cost at zero set size.

    Nonnegative, zero exactly when the cost is constant; scales with the
    cost and ignores constant shifts (a generalized deviation measure).
    """
    if isinstance(spec, SmoothPhi):
        return SensitivityValue(float(np.sqrt(2.0 * d.variance() / spec.phi_dd)), Growth.SQRT)
    if isinstance(spec, TV):
        return SensitivityValue(0.5 * d.range(), Growth.LINEAR)
    if isinstance(spec, Budgeted):
        return SensitivityValue(d.mean() - d.min(), Growth.LINEAR)
    if isinstance(spec, ConvexComb):
        return SensitivityValue(d.cvar_deviation(spec.alpha), Growth.LINEAR)
    if isinstance(spec, Symmetric):
        return SensitivityValue(d.cvar_deviation(0.5), Growth.LINEAR)
    if isinstance(spec, Wasserstein):
        raise UnsupportedFamilyError(
            "Wasserstein sensitivity perturbs atom locations; "
            "use wcsens.wasserstein with a cost oracle"
        )
    raise UnsupportedFamilyError(f"unknown uncertainty family: {spec!r}")


def penalty_sensitivity(d: DiscreteDistribution, spec) -> float:
    """Slope of the penalty-form worst case in the penalty weight.

    Defined for smooth divergence only, where the tilt is linear in the
    penalty weight and the slope is Var(f) / phi''(1).
    """
    if not isinstance(spec, SmoothPhi):
        raise UnsupportedFamilyError("penalty sensitivity requires a smooth-phi family")
    return d.variance() / spec.phi_dd


def box_fill_weights(d: DiscreteDistribution, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Maximize q'f over {lower <= q <= upper, 1'q = 1} by greedy top fill.

    Every atom starts at its lower bound; the remaining budget is poured
    into the largest values first.  Requires sum(lower) <= 1 <= sum(upper).
    """
    lo = lower[d.order]
    hi = upper[d.order]
    caps = hi - lo
    budget = 1.0 - float(lo.sum())
    if budget < -1e-12 or budget > caps.sum() + 1e-12:
        raise DomainError("box bounds cannot carry a probability vector")
    cum = np.cumsum(caps)
    fill = np.clip(budget - (cum - caps), 0.0, caps)
    q = np.empty(d.n)
    q[d.order] = lo + fill
    return q


def tv_reallocation(d: DiscreteDistribution, eps: float) -> np.ndarray:
    """Worst-case weights in the total-variation ball: move eps/2 of mass
    onto the single top atom, draining the smallest values first."""
    move = min(0.5 * eps, 1.0 - d.probs[d.order[0]])
    drain_idx = d.order[1:][::-1]  # ascending by value, receiver excluded
    p_drain = d.probs[drain_idx]
    cum = np.cumsum(p_drain)
    take = np.clip(move - (cum - p_drain), 0.0, p_drain)
    q = d.probs.copy()
    q[drain_idx] -= take
    q[d.order[0]] += take.sum()
    return q


def _check_eps(spec, eps: float) -> None:
    if eps < 0.0:
        raise DomainError(f"set size must be nonnegative, got {eps}")
    if isinstance(spec, TV) and eps > 2.0:
        raise DomainError(f"total-variation size is at most 2, got {eps}")
    if isinstance(spec, (ConvexComb, Symmetric)) and eps > 1.0:
        raise DomainError(f"{spec.label} size is at most 1, got {eps}")


def worst_case(d: DiscreteDistribution, spec, eps: float) -> WorstCaseResult:
    """Worst-case expected cost and attaining weights at set size eps."""
    _check_eps(spec, eps)
    if eps == 0.0:
        return WorstCaseResult(_label(spec), eps, d.mean(), d.probs.copy())

    if isinstance(spec, SmoothPhi):
        if spec.kind is PhiKind.MODIFIED_CHI2:
            value, q, dual = smooth.chi2_worst_case(d, eps / spec.phi_dd)
            if dual.get("delta") is not None and not dual.get("saturated"):
                dual["delta"] = dual["delta"] * spec.phi_dd
        elif spec.kind is PhiKind.KL:
            value, q, dual = smooth.kl_worst_case(d, eps / spec.phi_dd)
            if dual.get("delta") is not None:
                dual["delta"] = dual["delta"] * spec.phi_dd
        else:
            value, q, dual = smooth.custom_worst_case(
                d, eps, spec.phi_conj, spec.phi_conj_prime, spec.phi_dd
            )
        return WorstCaseResult(spec.label, eps, value, q, dual)

    if isinstance(spec, TV):
        q = tv_reallocation(d, eps)
        return WorstCaseResult(spec.label, eps, float(q @ d.values), q)

    if isinstance(spec, Budgeted):
        level = eps / (1.0 + eps)
        q = d._cvar_weights_any(level)
        return WorstCaseResult(spec.label, eps, d._cvar_any(level), q)

    if isinstance(spec, ConvexComb):
        tail = d._cvar_weights_any(spec.alpha.alpha)
        q = (1.0 - eps) * d.probs + eps * tail
        value = (1.0 - eps) * d.mean() + eps * d.cvar(spec.alpha)
        return WorstCaseResult(spec.label, eps, value, q)

    if isinstance(spec, Symmetric):
        level = 1.0 / (2.0 - eps) if eps < 1.0 else 1.0
        tail = d._cvar_weights_any(level)
        q = (1.0 - eps) * d.probs + eps * tail
        value = (1.0 - eps) * d.mean() + eps * d._cvar_any(level)
        return WorstCaseResult(spec.label, eps, value, q)

    if isinstance(spec, Wasserstein):
        raise UnsupportedFamilyError(
            "Wasserstein worst case needs a cost oracle; use wcsens.wasserstein"
        )
    raise UnsupportedFamilyError(f"unknown uncertainty family: {spec!r}")


def budgeted_slope(d: DiscreteDistribution, eps: float) -> float:
    """Slope of the budgeted worst-case value on the linear piece holding eps.

    The value is piecewise linear in eps with breakpoints where the cap
    1/(1+eps) crosses a cumulative probability; inside a piece the slope is
    sum_{i<=k} p_(i) (f_(i) - f_(k+1)).
    """
    if eps < 0.0:
        raise DomainError(f"set size must be nonnegative, got {eps}")
    k = d._tail_index(1.0 / (1.0 + eps))
    head_p = d.sorted_probs[:k]
    head_f = d.sorted_values[:k]
    return float(head_p @ (head_f - d.sorted_values[k]))


def finite_difference_slope(d: DiscreteDistribution, spec, eps_grid) -> list:
    """Empirical slopes (V(eps) - V(0)) / g(eps) for validation sweeps."""
    eps_grid = [float(e) for e in eps_grid]
    if any(e <= 0.0 for e in eps_grid):
        raise DomainError("eps grid must be strictly positive")
    if any(b <= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise DomainError("eps grid must be strictly increasing")
    base = d.mean()
    growth = sensitivity(d, spec).growth if not isinstance(spec, Wasserstein) else Growth.LINEAR
    out = []
    for e in eps_grid:
        v = worst_case(d, spec, e).value
        out.append((e, (v - base) / growth.g(e)))
    return out


def _label(spec) -> str:
    return getattr(spec, "label", spec.__class__.__name__.lower())
