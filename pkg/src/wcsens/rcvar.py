"""Robust CVaR: worst-case tail expectation over weight uncertainty sets.

For a tail level beta, the robust value max_{q in Q(eps)} CVaR_{q,beta}(f)
grows from CVaR_{p,beta}(f) at rate given by a spread measure of the upper
tail t = max(f - VaR_beta, 0):

=================  ==================================================  ========
family             sensitivity of CVaR_beta                            growth
=================  ==================================================  ========
smooth divergence  sqrt(2 Var(t) / phi''(1)) / (1 - beta)              sqrt
total variation    (max f - VaR_beta) / (2 (1 - beta))                 linear
budgeted           CVaR_beta - VaR_beta                                linear
convex comb        (CVaR_alpha(t) - mean t) / (1 - beta)               linear
=================  ==================================================  ========

Exact finite-size values come from linear-programming duality.  The duals
are piecewise linear with breakpoints only at scenario values, so they are
minimized by enumeration (O(n^2)) rather than a generic LP solve:

* budgeted: the cap (1+eps) p composes with the tail cap q/(1-beta) into a
  plain CVaR at the inflated level (beta + eps) / (1 + eps);
* total variation: min over (gamma, tau) of
    gamma + [p' max(t_gamma, tau) + (eps/2) (max t_gamma - tau)] / (1-beta),
  t_gamma = max(f - gamma, 0), tau running over tail-excess values;
* convex combination: min over (gamma, nu) of
    gamma + eps nu + (1-eps)/(1-beta) p' t_gamma
          + eps/(1-alpha) p' max(t_gamma/(1-beta) - nu, 0).

The smooth-divergence value is reported as the first-order approximation
CVaR + sqrt(eps) * sensitivity and tagged as such.
"""

from __future__ import annotations

import warnings

import numpy as np

from .dist import DiscreteDistribution, RiskLevel, _as_level
from .errors import DegeneracyWarning, DomainError, UnsupportedFamilyError
from .sets import (
    Budgeted,
    ConvexComb,
    Growth,
    SmoothPhi,
    Symmetric,
    TV,
    Wasserstein,
    WorstCaseResult,
)
from .worstcase import SensitivityValue, _check_eps, box_fill_weights, tv_reallocation


def _warn_if_degenerate(d: DiscreteDistribution, beta: float) -> None:
    # The tail formulas assume 1 - beta falls strictly between cumulative
    # probabilities; on a knife edge we keep the smaller-index quantile.
    if np.any(np.abs(d.sorted_cum[:-1] - (1.0 - beta)) <= 1e-12):
        warnings.warn(
            f"tail level beta={beta:g} hits a probability atom exactly; "
            "using the boundary quantile convention",
            DegeneracyWarning,
            stacklevel=3,
        )


def rcvar_sensitivity(d: DiscreteDistribution, beta, spec) -> SensitivityValue:
    """Slope of the robust CVaR at zero set size."""
    beta = _as_level(beta)
    _warn_if_degenerate(d, beta)
    one_minus = 1.0 - beta
    if isinstance(spec, SmoothPhi):
        tail = d.upper_tail_excess(beta)
        value = np.sqrt(2.0 * tail.variance() / spec.phi_dd) / one_minus
        return SensitivityValue(float(value), Growth.SQRT)
    if isinstance(spec, TV):
        return SensitivityValue((d.max() - d.var_quantile(beta)) / (2.0 * one_minus), Growth.LINEAR)
    if isinstance(spec, Budgeted):
        return SensitivityValue(d.cvar(beta) - d.var_quantile(beta), Growth.LINEAR)
    if isinstance(spec, (ConvexComb, Symmetric)):
        alpha = spec.alpha.alpha if isinstance(spec, ConvexComb) else 0.5
        tail = d.upper_tail_excess(beta)
        return SensitivityValue(tail.cvar_deviation(alpha) / one_minus, Growth.LINEAR)
    if isinstance(spec, Wasserstein):
        raise UnsupportedFamilyError("Wasserstein robust CVaR is not supported")
    raise UnsupportedFamilyError(f"unknown uncertainty family: {spec!r}")


def _tv_dual_value(d: DiscreteDistribution, beta: float, eps: float) -> float:
    f = d.values
    p = d.probs
    one_minus = 1.0 - beta
    best = np.inf
    for gamma in np.unique(f):
        t = np.maximum(f - gamma, 0.0)
        t_max = float(t.max())
        order = np.argsort(t)
        ts = t[order]
        ps = p[order]
        cum_p = np.concatenate([[0.0], np.cumsum(ps)])
        cum_pt = np.concatenate([[0.0], np.cumsum(ps * ts)])
        total_pt = cum_pt[-1]
        for tau in np.unique(ts):
            j = int(np.searchsorted(ts, tau, side="left"))  # entries with t < tau
            p_term = cum_p[j] * tau + (total_pt - cum_pt[j])
            obj = gamma + (p_term + 0.5 * eps * (t_max - tau)) / one_minus
            best = min(best, obj)
    return float(best)


def _convex_comb_dual_value(
    d: DiscreteDistribution, beta: float, alpha: float, eps: float
) -> float:
    f = d.values
    p = d.probs
    one_minus = 1.0 - beta
    best = np.inf
    for gamma in np.unique(f):
        t = np.maximum(f - gamma, 0.0)
        base = gamma + (1.0 - eps) / one_minus * float(p @ t)
        s = t / one_minus
        order = np.argsort(s)[::-1]
        ss = s[order]
        ps = p[order]
        cum_p = np.concatenate([[0.0], np.cumsum(ps)])
        cum_ps = np.concatenate([[0.0], np.cumsum(ps * ss)])
        for nu in np.concatenate([[0.0], np.unique(s)]):
            j = int(np.searchsorted(-ss, -nu, side="left"))  # entries with s > nu
            excess = cum_ps[j] - nu * cum_p[j]
            obj = base + eps * nu + eps / (1.0 - alpha) * excess
            best = min(best, obj)
    return float(best)


def rcvar_value(d: DiscreteDistribution, beta, spec, eps: float) -> WorstCaseResult:
    """Robust CVaR at set size eps.

    Weights are attached only for the budgeted family, whose construction
    produces them directly; the dual enumerations for the other families
    certify the value alone.
    """
    beta = _as_level(beta)
    _check_eps(spec, eps)
    if eps == 0.0:
        value = d.cvar(beta)
        q = d._cvar_weights_any(beta) if isinstance(spec, Budgeted) else None
        return WorstCaseResult(_label(spec), eps, value, q, None, beta=beta)

    if isinstance(spec, Budgeted):
        level = (beta + eps) / (1.0 + eps)
        q = d._cvar_weights_any(level)
        return WorstCaseResult(spec.label, eps, d._cvar_any(level), q, None, beta=beta)

    if isinstance(spec, TV):
        value = _tv_dual_value(d, beta, eps)
        return WorstCaseResult(spec.label, eps, value, None, None, beta=beta)

    if isinstance(spec, ConvexComb):
        value = _convex_comb_dual_value(d, beta, spec.alpha.alpha, eps)
        return WorstCaseResult(spec.label, eps, value, None, None, beta=beta)

    if isinstance(spec, Symmetric):
        if eps >= 1.0:
            value = d.max()
        else:
            value = _convex_comb_dual_value(d, beta, 1.0 / (2.0 - eps), eps)
        return WorstCaseResult(spec.label, eps, value, None, None, beta=beta)

    if isinstance(spec, SmoothPhi):
        sens = rcvar_sensitivity(d, beta, spec).value
        value = d.cvar(beta) + np.sqrt(eps) * sens
        return WorstCaseResult(
            spec.label,
            eps,
            float(value),
            None,
            {"approximation": "first_order", "sensitivity": sens},
            beta=beta,
        )

    raise UnsupportedFamilyError(f"unknown uncertainty family: {spec!r}")


def rcvar_worst_weights(d: DiscreteDistribution, beta, spec, eps: float) -> np.ndarray:
    """Effective maximizing weights Q of the robust CVaR program.

    The joint maximization over (q, Q) with Q <= q/(1-beta) is solved by
    first reshaping q greedily in favor of large values (the family's own
    worst-case construction), then filling Q against the caps q/(1-beta).
    Used for exact subgradients in decision optimization.
    """
    beta = _as_level(beta)
    _check_eps(spec, eps)
    if isinstance(spec, Budgeted):
        return d._cvar_weights_any((beta + eps) / (1.0 + eps))
    if isinstance(spec, TV):
        q = tv_reallocation(d, eps) if eps > 0 else d.probs.copy()
    elif isinstance(spec, (ConvexComb, Symmetric)):
        if isinstance(spec, Symmetric) and eps >= 1.0:
            q = np.zeros(d.n)
            q[d.order[0]] = 1.0
            return q
        alpha = spec.alpha.alpha if isinstance(spec, ConvexComb) else 1.0 / (2.0 - eps)
        upper = (1.0 - eps + eps / (1.0 - alpha)) * d.probs
        q = box_fill_weights(d, (1.0 - eps) * d.probs, upper)
    else:
        raise UnsupportedFamilyError(
            f"no exact weight construction for family {_label(spec)!r}"
        )
    caps = q / (1.0 - beta)
    return box_fill_weights(d, np.zeros(d.n), caps)


def _label(spec) -> str:
    return getattr(spec, "label", spec.__class__.__name__.lower())
