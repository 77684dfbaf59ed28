"""Discrete cost distributions and the VaR/CVaR primitives built on them.

A distribution is a finite list of (value, probability) atoms with strictly
positive probabilities summing to one.  Tail statistics are computed from the
cached descending order of the values; ties are broken by original index so
every operation is deterministic and permutation invariant.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DataFormatError, DistributionError

# Construction tolerance on |sum(probs) - 1|; anything closer is renormalized.
PROB_TOL = 1e-12

# Slack used when comparing cumulative probabilities against a tail level, so
# that knife-edge levels (e.g. 1 - beta equal to a partial sum) resolve to the
# smaller-index convention instead of depending on rounding.
_CUM_TOL = 1e-12


@dataclass(frozen=True)
class RiskLevel:
    """Tail level alpha in [0, 1); alpha = 0 means the whole distribution."""

    alpha: float

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise DistributionError(f"risk level must lie in [0, 1), got {self.alpha}")


def _as_level(level) -> float:
    return level.alpha if isinstance(level, RiskLevel) else RiskLevel(float(level)).alpha


@dataclass(frozen=True)
class DiscreteDistribution:
    """Atoms ``values`` with strictly positive ``probs`` summing to one.

    ``renormalized`` records whether the constructor had to divide the
    probabilities by their sum (allowed only within ``PROB_TOL``);
    ``dropped_zero_atoms`` is nonzero only for instances built through
    :meth:`dropping_zero_atoms`.
    """

    values: np.ndarray
    probs: np.ndarray
    renormalized: bool = field(default=False, compare=False)
    dropped_zero_atoms: int = field(default=0, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if values.ndim != 1 or probs.ndim != 1:
            raise DistributionError("values and probs must be one-dimensional")
        if values.size != probs.size:
            raise DistributionError(
                f"length mismatch: {values.size} values vs {probs.size} probs"
            )
        if values.size == 0:
            raise DistributionError("a distribution needs at least one atom")
        if not np.all(np.isfinite(values)):
            raise DistributionError("values must be finite")
        if not np.all(np.isfinite(probs)):
            raise DistributionError("probs must be finite")
        if np.any(probs <= 0.0):
            raise DistributionError(
                "probabilities must be strictly positive; "
                "use DiscreteDistribution.dropping_zero_atoms to discard zeros"
            )
        total = probs.sum()
        renorm = total != 1.0
        if abs(total - 1.0) > PROB_TOL:
            raise DistributionError(f"probabilities sum to {total!r}, not 1")
        if renorm:
            probs = probs / total
        values.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "renormalized", bool(renorm or self.renormalized))

    @classmethod
    def dropping_zero_atoms(cls, values, probs) -> "DiscreteDistribution":
        """Build a distribution discarding zero-probability atoms.

        Negative probabilities are still rejected.  The number of dropped
        atoms is recorded on the instance.
        """
        values = np.asarray(values, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if np.any(probs < 0.0):
            raise DistributionError("probabilities must be nonnegative")
        keep = probs > 0.0
        dropped = int(np.count_nonzero(~keep))
        dist = cls(values[keep], probs[keep])
        object.__setattr__(dist, "dropped_zero_atoms", dropped)
        return dist

    @classmethod
    def uniform(cls, values) -> "DiscreteDistribution":
        values = np.asarray(values, dtype=float)
        n = values.size
        return cls(values, np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.values.size

    # -- cached descending order -------------------------------------------

    @cached_property
    def order(self) -> np.ndarray:
        """Indices sorting values descending, ties by ascending original index."""
        n = self.values.size
        return np.lexsort((np.arange(n), -self.values))

    @cached_property
    def sorted_values(self) -> np.ndarray:
        return self.values[self.order]

    @cached_property
    def sorted_probs(self) -> np.ndarray:
        return self.probs[self.order]

    @cached_property
    def sorted_cum(self) -> np.ndarray:
        return np.cumsum(self.sorted_probs)

    # -- moments ------------------------------------------------------------

    def mean(self) -> float:
        return float(self.probs @ self.values)

    def variance(self) -> float:
        m = self.mean()
        return float(self.probs @ (self.values - m) ** 2)

    def stdev(self) -> float:
        return float(np.sqrt(self.variance()))

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())

    def range(self) -> float:
        return self.max() - self.min()

    # -- tail statistics ------------------------------------------------------

    def _tail_index(self, level: float) -> int:
        """Largest k with cum_k <= level (0 <= k <= n-1), boundary inclusive.

        The returned k counts the atoms strictly inside the upper tail of
        mass ``level``; the (k+1)-th largest value is the quantile.
        """
        k = int(np.searchsorted(self.sorted_cum, level + _CUM_TOL, side="right"))
        return min(k, self.n - 1)

    def var_quantile(self, beta) -> float:
        """Upper beta-quantile: the (k+1)-th largest value where the k largest
        atoms carry at most 1 - beta probability.  On a knife edge (cumulative
        mass exactly 1 - beta) the next smaller value is returned."""
        beta = _as_level(beta)
        k = self._tail_index(1.0 - beta)
        return float(self.sorted_values[k])

    def cvar(self, alpha) -> float:
        """Expected value of the worst 1 - alpha tail.

        Computed by the greedy fill: the largest atoms receive weight
        p/(1-alpha) until the budget is used, the marginal atom the rest.
        Equals the mean at alpha = 0 and the maximum once alpha >= 1 - p_(1).
        """
        alpha = _as_level(alpha)
        return self._cvar_any(alpha)

    def _cvar_any(self, alpha: float) -> float:
        # Internal variant also accepting alpha == 1 (point mass on the max).
        if alpha >= 1.0:
            return float(self.sorted_values[0])
        w = 1.0 / (1.0 - alpha)
        k = self._tail_index(1.0 - alpha)
        head = float(self.sorted_cum[k - 1]) if k > 0 else 0.0
        head_val = float(self.sorted_probs[:k] @ self.sorted_values[:k]) if k > 0 else 0.0
        rest = max(1.0 - w * head, 0.0)
        return w * head_val + rest * float(self.sorted_values[k])

    def cvar_weights(self, alpha) -> np.ndarray:
        """Maximizing weights of the tail-expectation program, original order."""
        alpha = _as_level(alpha)
        return self._cvar_weights_any(alpha)

    def _cvar_weights_any(self, alpha: float) -> np.ndarray:
        q = np.zeros(self.n)
        if alpha >= 1.0:
            q[self.order[0]] = 1.0
            return q
        w = 1.0 / (1.0 - alpha)
        k = self._tail_index(1.0 - alpha)
        head = float(self.sorted_cum[k - 1]) if k > 0 else 0.0
        q_sorted = np.zeros(self.n)
        q_sorted[:k] = w * self.sorted_probs[:k]
        q_sorted[k] = max(1.0 - w * head, 0.0)
        q[self.order] = q_sorted
        return q

    def cvar_deviation(self, alpha) -> float:
        return self.cvar(alpha) - self.mean()

    def upper_tail_excess(self, beta) -> "DiscreteDistribution":
        """Distribution of max(f - VaR_beta, 0) under the same probabilities."""
        v = self.var_quantile(beta)
        return DiscreteDistribution(np.maximum(self.values - v, 0.0), self.probs)


def load_distribution_csv(path) -> DiscreteDistribution:
    """Read a distribution from CSV.

    Two formats, both with a header row:

    * ``value,prob`` -- explicit atoms;
    * ``value`` -- one sample per line, mapped to the empirical
      distribution with weight 1/n each.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    header = [cell.strip().lower() for cell in rows[0]]
    if header == ["value", "prob"]:
        two_col = True
    elif header == ["value"]:
        two_col = False
    else:
        raise DataFormatError(
            f"{path}: expected header 'value,prob' or 'value', got {rows[0]!r}"
        )
    if len(rows) == 1:
        raise DataFormatError(f"{path}: no data rows after header")
    values, probs = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        want = 2 if two_col else 1
        if len(row) != want:
            raise DataFormatError(
                f"{path}: row {lineno} has {len(row)} fields, expected {want}"
            )
        try:
            values.append(float(row[0]))
        except ValueError:
            raise DataFormatError(
                f"{path}: row {lineno} column 1: {row[0]!r} is not a number"
            ) from None
        if two_col:
            try:
                probs.append(float(row[1]))
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {lineno} column 2: {row[1]!r} is not a number"
                ) from None
    if two_col:
        return DiscreteDistribution(np.array(values), np.array(probs))
    return DiscreteDistribution.uniform(np.array(values))
