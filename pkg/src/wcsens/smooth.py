"""Dual solvers for worst-case expectation over smooth divergence balls.

The worst case of q'f over {sum_i p_i phi(q_i/p_i) <= eps, 1'q = 1, q >= 0}
is solved through its two-variable dual in (delta, c):

    sum_i p_i conj'(delta (f_i + c))                             = 1
    sum_i p_i [conj(z_i) - z_i conj'(z_i)] + eps                 = 0,
    z_i = delta (f_i + c),   q_i = p_i conj'(z_i),

where conj is the convex conjugate of phi.  The second equation says the
divergence of q equals eps (conj(z) - z conj'(z) = -phi(conj'(z))).

Three routes:

* modified chi-square: with the conjugate clamped at the q >= 0 boundary the
  system is piecewise linear-quadratic and is solved exactly by growing the
  active zero set upward from the smallest cost values;
* KL: the tilt q ~ p exp(delta f) is always interior, so a single bracketed
  root-find on the divergence in delta suffices;
* custom conjugates: damped Newton from the small-radius expansion point
  delta0 = sqrt(2 phi''(1) eps / Var), c0 = -mean.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .dist import DiscreteDistribution
from .errors import SolverError

_KKT_TOL = 1e-12
_VAR_FLOOR = 1e-30


def _nominal(d: DiscreteDistribution):
    return d.mean(), d.probs.copy(), {"delta": 0.0, "c": -d.mean()}


def _saturated(d: DiscreteDistribution):
    """Point mass on the maximum-value atoms, spread proportionally to p."""
    top = d.values == d.values.max()
    q = np.where(top, d.probs, 0.0)
    q = q / q.sum()
    return float(q @ d.values), q, {"delta": None, "c": None, "saturated": True}


def chi2_worst_case(d: DiscreteDistribution, eps_unit: float):
    """Exact worst case for phi(z) = (z-1)^2/2 at unit-scale radius eps_unit.

    While the tilt p_i (1 + delta (f_i - mean)) stays nonnegative this is the
    closed form q = p {1 + sqrt(2 eps / Var) (f - mean)}; beyond that radius
    atoms are zeroed from the smallest value upward and (delta, c) re-solved
    on the surviving support, where the dual system reduces to a quadratic.
    """
    if eps_unit == 0.0 or d.variance() <= _VAR_FLOOR * max(1.0, d.mean() ** 2):
        return _nominal(d)

    asc = d.order[::-1]
    v = d.values[asc]
    p = d.probs[asc]
    n = d.n
    # suffix sums over the kept set B = asc[t:]
    sp = np.concatenate([np.cumsum((p)[::-1])[::-1], [0.0]])
    spf = np.concatenate([np.cumsum((p * v)[::-1])[::-1], [0.0]])
    spf2 = np.concatenate([np.cumsum((p * v * v)[::-1])[::-1], [0.0]])
    # candidate drop counts: whole groups of tied values only
    boundaries = [0] + [t for t in range(1, n) if v[t] > v[t - 1]]

    scale2 = max(1.0, float(np.max(np.abs(v))) ** 2)
    for t in boundaries:
        P, S1, S2 = sp[t], spf[t], spf2[t]
        var_b = S2 - S1 * S1 / P
        if var_b <= _VAR_FLOOR * scale2:
            break  # support collapsed to the top value group
        num = 2.0 * eps_unit - (1.0 - P) / P
        if num < 0.0:
            break  # cannot spend that much divergence on zeros: saturated
        delta = np.sqrt(num / var_b)
        dc = ((1.0 - P) - delta * S1) / P
        factors = 1.0 + delta * v[t:] + dc
        if factors[0] < -_KKT_TOL:
            continue  # smallest kept atom would go negative: drop more
        if t > 0 and 1.0 + delta * v[t - 1] + dc > _KKT_TOL:
            continue  # a dropped atom wants mass back: inconsistent set
        q_sorted = np.zeros(n)
        q_sorted[t:] = p[t:] * np.maximum(factors, 0.0)
        q = np.empty(n)
        q[asc] = q_sorted
        value = float(q @ d.values)
        c = dc / delta if delta > 0 else -d.mean()
        return value, q, {"delta": float(delta), "c": float(c), "zeroed_atoms": t}
    return _saturated(d)


def kl_worst_case(d: DiscreteDistribution, eps_unit: float):
    """Exact worst case for phi(z) = z ln z - z + 1 at unit-scale radius.

    The maximizer is the exponential tilt q(delta) ~ p exp(delta f); delta
    solves KL(q(delta) | p) = eps, which is monotone, so bracketing plus
    Brent's method is reliable.  The divergence saturates at -ln(mass of the
    argmax atoms), beyond which the worst case is the capped point mass.
    """
    if eps_unit == 0.0 or d.variance() <= _VAR_FLOOR * max(1.0, d.mean() ** 2):
        return _nominal(d)
    f = d.values
    p = d.probs
    fmax = float(f.max())
    top_mass = float(p[f == fmax].sum())
    d_sat = -np.log(top_mass) if top_mass < 1.0 else 0.0
    if eps_unit >= d_sat - 1e-13:
        return _saturated(d)

    def tilt(delta):
        w = p * np.exp(delta * (f - fmax))
        z = w.sum()
        return w / z, np.log(z)

    def div_gap(delta):
        q, logz = tilt(delta)
        return float(delta * (q @ f - fmax) - logz) - eps_unit

    hi = max(np.sqrt(2.0 * eps_unit / d.variance()), 1e-9)
    while div_gap(hi) < 0.0:
        hi *= 2.0
        if hi > 1e12:  # pragma: no cover - blocked by the saturation test
            raise SolverError("KL tilt failed to bracket the radius", residual=div_gap(hi))
    delta = brentq(div_gap, 0.0, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200)
    q, logz = tilt(delta)
    value = float(q @ f)
    c = -(fmax + logz / delta)
    return value, q, {"delta": float(delta), "c": float(c)}


def custom_worst_case(
    d: DiscreteDistribution,
    eps: float,
    phi_conj,
    phi_conj_prime,
    phi_dd: float,
    max_iter: int = 100,
    tol: float = 1e-10,
):
    """Damped Newton on the dual first-order system for a caller-supplied
    conjugate pair.  The conjugate must encode the q >= 0 domain of phi (as
    the vetted chi-square/KL conjugates do); non-convergence raises
    SolverError carrying the last residual norm.
    """
    if eps == 0.0 or d.variance() <= _VAR_FLOOR * max(1.0, d.mean() ** 2):
        return _nominal(d)
    f = d.values
    p = d.probs
    conj = np.vectorize(phi_conj, otypes=[float])
    conj_p = np.vectorize(phi_conj_prime, otypes=[float])

    def residual(x):
        delta, c = x
        z = delta * (f + c)
        cp = conj_p(z)
        r1 = float(p @ cp - 1.0)
        r2 = float(p @ (conj(z) - z * cp) + eps)
        return np.array([r1, r2])

    x = np.array([np.sqrt(2.0 * phi_dd * eps / d.variance()), -d.mean()])
    r = residual(x)
    norm = float(np.max(np.abs(r)))
    for _ in range(max_iter):
        if norm <= tol:
            break
        jac = np.empty((2, 2))
        for j in range(2):
            h = 1e-7 * max(1.0, abs(x[j]))
            xp = x.copy()
            xp[j] += h
            xm = x.copy()
            xm[j] -= h
            jac[:, j] = (residual(xp) - residual(xm)) / (2.0 * h)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            raise SolverError("singular Jacobian in smooth-phi dual solve", residual=norm)
        t = 1.0
        if x[0] + step[0] <= 0.0:  # keep delta strictly positive
            t = min(t, -0.95 * x[0] / step[0])
        for _ in range(40):
            x_new = x + t * step
            r_new = residual(x_new)
            n_new = float(np.max(np.abs(r_new)))
            if n_new < norm:
                break
            t *= 0.5
        else:
            raise SolverError(
                "smooth-phi dual Newton stalled during damping", residual=norm
            )
        x, r, norm = x_new, r_new, n_new
    if norm > tol:
        raise SolverError(
            f"smooth-phi dual Newton did not reach tolerance {tol:g}", residual=norm
        )
    delta, c = float(x[0]), float(x[1])
    q = np.maximum(p * conj_p(delta * (f + c)), 0.0)
    return float(q @ f), q, {"delta": delta, "c": c, "residual": norm}
