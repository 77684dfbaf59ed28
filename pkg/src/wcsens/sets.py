"""Uncertainty-set specifications and the worst-case result record.

A spec names the family and its fixed parameters; the set size ``eps`` is
supplied per call so one spec can drive a whole sweep.  Each family carries
the growth function g(eps) against which its sensitivity is measured:
``sqrt`` for smooth divergence balls, ``linear`` for everything else.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dist import RiskLevel
from .errors import DistributionError, DomainError


class Growth(enum.Enum):
    SQRT = "sqrt"
    LINEAR = "linear"

    def g(self, eps: float) -> float:
        return float(np.sqrt(eps)) if self is Growth.SQRT else float(eps)


class PhiKind(enum.Enum):
    MODIFIED_CHI2 = "modified_chi2"
    KL = "kl"
    CUSTOM = "custom"


@dataclass(frozen=True)
class SmoothPhi:
    """Divergence ball sum_i p_i phi(q_i/p_i) <= eps for a smooth convex phi.

    ``phi_dd`` is phi''(1) > 0.  The two named kinds have vetted solvers; a
    custom phi enters through its convex conjugate ``phi_conj`` and the
    conjugate's derivative ``phi_conj_prime`` (the dual solver never needs
    phi itself).  For the named kinds, phi_dd != 1 is treated as a scaling of
    the divergence, i.e. the ball radius is eps / phi_dd in the unit-scale
    divergence.
    """

    kind: PhiKind = PhiKind.MODIFIED_CHI2
    phi_dd: float = 1.0
    phi_conj: Optional[Callable[[float], float]] = None
    phi_conj_prime: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if not self.phi_dd > 0.0:
            raise DistributionError(f"phi''(1) must be positive, got {self.phi_dd}")
        if self.kind is PhiKind.CUSTOM and (
            self.phi_conj is None or self.phi_conj_prime is None
        ):
            raise DistributionError(
                "custom smooth phi requires phi_conj and phi_conj_prime"
            )

    @property
    def label(self) -> str:
        return self.kind.value

    growth = Growth.SQRT


@dataclass(frozen=True)
class TV:
    """Total variation ball sum_i |q_i - p_i| <= eps, eps in [0, 2]."""

    label = "tv"
    growth = Growth.LINEAR


@dataclass(frozen=True)
class Budgeted:
    """Likelihood-ratio cap 0 <= q <= (1 + eps) p."""

    label = "budgeted"
    growth = Growth.LINEAR


@dataclass(frozen=True)
class ConvexComb:
    """Mixture set (1 - eps) {p} + eps {q : 0 <= q <= p/(1-alpha)}, eps in [0, 1]."""

    alpha: RiskLevel

    def __post_init__(self):
        if not isinstance(self.alpha, RiskLevel):
            object.__setattr__(self, "alpha", RiskLevel(float(self.alpha)))

    @property
    def label(self) -> str:
        return f"convex_comb_{self.alpha.alpha:g}"

    growth = Growth.LINEAR


@dataclass(frozen=True)
class Symmetric:
    """Two-sided ratio band (1 - eps) p <= q <= p / (1 - eps), eps in [0, 1]."""

    label = "symmetric"
    growth = Growth.LINEAR


@dataclass(frozen=True)
class Wasserstein:
    """Marker for the transport-metric set; handled by the wasserstein module,
    which perturbs atom locations rather than weights."""

    label = "wasserstein"
    growth = Growth.LINEAR


# Any of the above; Wasserstein only as a rejection marker in weight-space ops.
UncertaintySetSpec = object

_WEIGHT_TOL = 1e-9
_NEG_TOL = 1e-12


@dataclass
class WorstCaseResult:
    """Worst-case value with the attaining weights over the nominal atoms.

    ``weights`` is None when the construction does not produce them (some
    robust-CVaR routes).  ``dual_info`` carries solver byproducts such as the
    dual pair (delta, c) of a smooth divergence solve.
    """

    family: str
    eps: float
    value: float
    weights: Optional[np.ndarray]
    dual_info: Optional[dict] = None
    beta: Optional[float] = None

    def __post_init__(self):
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if np.any(w < -_NEG_TOL):
                raise DomainError(
                    f"worst-case weights have negative entries (min {w.min()!r})"
                )
            w = np.maximum(w, 0.0)
            total = w.sum()
            if abs(total - 1.0) > _WEIGHT_TOL:
                raise DomainError(f"worst-case weights sum to {total!r}")
            self.weights = w

    def to_json_dict(self) -> dict:
        out = {
            "family": self.family,
            "eps": self.eps,
            "value": self.value,
            "weights": None if self.weights is None else [float(x) for x in self.weights],
        }
        if self.dual_info is not None:
            out["dual"] = self.dual_info
        if self.beta is not None:
            out["beta"] = self.beta
        return out
