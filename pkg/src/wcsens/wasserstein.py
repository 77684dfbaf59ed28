"""Worst-case sensitivity under a type-1 transport-metric uncertainty set.

Unlike the weight-space families, this set perturbs atom locations: mass at
a scenario Y_i may be moved to any point z of the scenario domain at cost
||z - Y_i|| per unit.  The slope of the worst-case expected cost at zero
budget is the steepest cost/transport difference quotient

    max_i  sup_{z != Y_i}  (f(x, z) - f(x, Y_i)) / ||z - Y_i||,

evaluated here by a dense scan over the declared domain plus golden-section
refinement of the best bracket.  Only the first-order value
mean + eps * slope is computed; full finite-budget transport problems are
out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .dist import DiscreteDistribution
from .errors import DomainError

_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"empty scenario interval [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Candidates:
    """Finite scenario candidates, either shared or one list per atom."""

    points: Union[Sequence[float], Sequence[Sequence[float]]]
    per_atom: bool = False


@dataclass(frozen=True)
class CostOracle:
    """Cost f(x, z) over a declared scenario domain.

    ``eval`` must be pure and finite on the domain.  ``norm`` is the
    transport metric on scenario space; for scalar scenarios 'abs' and 'l2'
    coincide.  ``analytic_sensitivity``, when supplied, is returned as the
    value and the grid scan is kept only as a cross-check.
    """

    eval: Callable[[object, object], float]
    scenario_domain: Union[Interval, Candidates]
    norm: str = "abs"
    analytic_sensitivity: Optional[Callable[[object], float]] = None

    def __post_init__(self):
        if self.norm not in ("abs", "l2"):
            raise DomainError(f"norm must be 'abs' or 'l2', got {self.norm!r}")

    def distance(self, z, y) -> float:
        diff = np.asarray(z, dtype=float) - np.asarray(y, dtype=float)
        if self.norm == "abs" and diff.ndim == 0:
            return float(abs(diff))
        return float(np.linalg.norm(np.atleast_1d(diff)))


@dataclass
class WassersteinSensitivity:
    value: float
    argmax_atom: int
    argmax_point: object
    unbounded: bool = False
    grid_value: Optional[float] = None


# Expansion factor used to truncate unbounded interval requests; if the best
# ratio sits on the artificial edge the result is flagged, not trusted.
_UNBOUNDED_SPAN = 64.0
_BASE_GRID = 2048
# Relative offsets probing each atom's immediate neighborhood, so piecewise
# slopes through the atoms themselves are always sampled.
_LOCAL_OFFSETS = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2)


def _interval_bounds(domain: Interval, atoms: np.ndarray):
    lo, hi = domain.lo, domain.hi
    span = float(atoms.max() - atoms.min()) or 1.0
    lo_unbounded = not math.isfinite(lo)
    hi_unbounded = not math.isfinite(hi)
    if lo_unbounded:
        lo = float(atoms.min()) - _UNBOUNDED_SPAN * span
    if hi_unbounded:
        hi = float(atoms.max()) + _UNBOUNDED_SPAN * span
    return lo, hi, lo_unbounded, hi_unbounded


def _golden_max(fun, lo: float, hi: float, tol: float = 1e-8) -> tuple:
    a, b = lo, hi
    x1 = b - _GOLD * (b - a)
    x2 = a + _GOLD * (b - a)
    f1, f2 = fun(x1), fun(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLD * (b - a)
            f2 = fun(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLD * (b - a)
            f1 = fun(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def wasserstein_sensitivity(
    d: DiscreteDistribution, oracle: CostOracle, x
) -> WassersteinSensitivity:
    """Maximize the cost/transport difference quotient over atoms and domain."""
    atoms = d.values
    domain = oracle.scenario_domain

    best = -math.inf
    best_atom = -1
    best_point = None
    unbounded = False

    if isinstance(domain, Candidates):
        for i, y in enumerate(atoms):
            pts = domain.points[i] if domain.per_atom else domain.points
            pts = list(pts)
            if not pts:
                raise DomainError(f"empty candidate list for atom {i}")
            fy = oracle.eval(x, y)
            for z in pts:
                dist = oracle.distance(z, y)
                if dist <= 1e-15:
                    continue
                ratio = (oracle.eval(x, z) - fy) / dist
                if ratio > best:
                    best, best_atom, best_point = ratio, i, z
        if best_atom < 0:
            raise DomainError("no candidate distinct from the atoms")
    else:
        lo, hi, lo_unb, hi_unb = _interval_bounds(domain, atoms)
        grid = np.linspace(lo, hi, _BASE_GRID)
        span = hi - lo
        offsets = span * np.array(_LOCAL_OFFSETS)
        probes = np.concatenate(
            [atoms[:, None] + offsets, atoms[:, None] - offsets]
        ).ravel()
        zs = np.unique(np.clip(np.concatenate([grid, probes]), lo, hi))
        step = span / (_BASE_GRID - 1)
        for i, y in enumerate(atoms):
            fy = oracle.eval(x, y)
            mask = np.abs(zs - y) > 1e-15
            z_ok = zs[mask]
            ratios = np.array([(oracle.eval(x, z) - fy) / abs(z - y) for z in z_ok])
            j = int(np.argmax(ratios))
            z0, r0 = float(z_ok[j]), float(ratios[j])
            # refine inside the bracket around the best grid point, keeping
            # clear of the undefined point z = y
            a = max(lo, z0 - step)
            b = min(hi, z0 + step)
            if a <= y <= b:
                if z0 >= y:
                    a = y + max(1e-12, 1e-12 * abs(y))
                else:
                    b = y - max(1e-12, 1e-12 * abs(y))
            if b > a:
                z_ref, r_ref = _golden_max(
                    lambda z: (oracle.eval(x, z) - fy) / abs(z - y), a, b
                )
                if r_ref > r0:
                    z0, r0 = z_ref, r_ref
            if r0 > best:
                best, best_atom, best_point = r0, i, z0
        edge = step * 1.5
        if (lo_unb and best_point is not None and best_point - lo < edge) or (
            hi_unb and best_point is not None and hi - best_point < edge
        ):
            unbounded = True

    if oracle.analytic_sensitivity is not None:
        analytic = float(oracle.analytic_sensitivity(x))
        return WassersteinSensitivity(
            analytic, best_atom, best_point, unbounded, grid_value=best
        )
    return WassersteinSensitivity(float(best), best_atom, best_point, unbounded)


def wasserstein_value_first_order(
    d: DiscreteDistribution, oracle: CostOracle, x, eps: float
) -> float:
    """First-order worst-case value: nominal mean plus eps times the slope.

    Valid for small transport budgets only; the o(eps) remainder is not
    tracked.
    """
    if eps < 0.0:
        raise DomainError(f"transport budget must be nonnegative, got {eps}")
    costs = np.array([oracle.eval(x, y) for y in d.values])
    base = float(d.probs @ costs)
    if eps == 0.0:
        return base
    return base + eps * wasserstein_sensitivity(d, oracle, x).value
