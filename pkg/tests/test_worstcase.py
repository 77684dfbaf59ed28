import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wcsens import (
    Budgeted,
    ConvexComb,
    DiscreteDistribution,
    Growth,
    PhiKind,
    SmoothPhi,
    Symmetric,
    TV,
    Wasserstein,
    budgeted_slope,
    finite_difference_slope,
    penalty_sensitivity,
    sensitivity,
    worst_case,
)
from wcsens.errors import DomainError, UnsupportedFamilyError

from oracles import (
    box_vertices,
    chi2_div,
    feasible_mask,
    kl_div,
    ray_candidates,
    sqp_divergence_max,
    simplex_grid,
    tv_vertices,
)


def uniform(values):
    return DiscreteDistribution.uniform(np.asarray(values, dtype=float))


D123 = uniform([1, 2, 3])
D321 = uniform([3, 2, 1])

ALL_FAMILIES = [
    SmoothPhi(),
    SmoothPhi(PhiKind.KL),
    TV(),
    Budgeted(),
    ConvexComb(0.5),
    Symmetric(),
]


class TestSensitivityExamples:
    def test_table_values(self):
        assert sensitivity(D123, SmoothPhi()).value == pytest.approx(np.sqrt(4.0 / 3.0))
        assert sensitivity(D123, SmoothPhi()).growth is Growth.SQRT
        assert sensitivity(D123, TV()) == (1.0, Growth.LINEAR)
        assert sensitivity(D123, Budgeted()) == (1.0, Growth.LINEAR)
        assert sensitivity(D123, ConvexComb(0.5)).value == pytest.approx(2.0 / 3.0)
        assert sensitivity(D123, Symmetric()).value == pytest.approx(2.0 / 3.0)

    def test_constant_is_zero(self):
        const = DiscreteDistribution([4.0, 4.0], [0.3, 0.7])
        for spec in ALL_FAMILIES:
            assert sensitivity(const, spec).value == pytest.approx(0.0, abs=1e-12)

    def test_wasserstein_rejected(self):
        with pytest.raises(UnsupportedFamilyError):
            sensitivity(D123, Wasserstein())
        with pytest.raises(UnsupportedFamilyError):
            worst_case(D123, Wasserstein(), 0.1)


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.floats(-20, 20), min_size=1, max_size=20),
    st.randoms(use_true_random=False),
    st.floats(0, 4),
    st.floats(-7, 7),
)
def test_deviation_axioms(values, rnd, beta_scale, shift):
    raw = [rnd.random() + 0.02 for _ in values]
    probs = np.array(raw) / sum(raw)
    f = np.array(values)
    d = DiscreteDistribution(f, probs)
    spec = ALL_FAMILIES[rnd.randrange(len(ALL_FAMILIES))]
    s = sensitivity(d, spec).value
    assert s >= -1e-12
    scale = max(1.0, abs(s) * max(1.0, beta_scale))
    s_scaled = sensitivity(DiscreteDistribution(beta_scale * f, probs), spec).value
    assert abs(s_scaled - beta_scale * s) <= 1e-9 * scale
    s_shift = sensitivity(DiscreteDistribution(f + shift, probs), spec).value
    assert abs(s_shift - s) <= 1e-9 * scale


class TestWorstCaseExamples:
    def test_chi2_closed_form(self):
        res = worst_case(D123, SmoothPhi(), 0.12)
        assert res.value == pytest.approx(2.4)
        np.testing.assert_allclose(res.weights, [0.4 / 3, 1.0 / 3, 1.6 / 3], atol=1e-12)
        assert chi2_div(res.weights, D123.probs) == pytest.approx(0.12, abs=1e-12)

    def test_tv(self):
        res = worst_case(D321, TV(), 0.2)
        assert res.value == pytest.approx(2.2)
        np.testing.assert_allclose(res.weights, [1 / 3 + 0.1, 1 / 3, 1 / 3 - 0.1])

    def test_budgeted(self):
        res = worst_case(D321, Budgeted(), 0.2)
        assert res.value == pytest.approx(2.2)

    def test_convex_comb(self):
        res = worst_case(D123, ConvexComb(0.5), 0.3)
        assert res.value == pytest.approx(2.2)

    def test_eps_zero_nominal(self):
        for spec in ALL_FAMILIES:
            res = worst_case(D123, spec, 0.0)
            assert res.value == pytest.approx(D123.mean())
            np.testing.assert_allclose(res.weights, D123.probs)

    def test_result_invariants(self):
        rng = np.random.default_rng(3)
        for spec, eps in [(SmoothPhi(), 0.4), (SmoothPhi(PhiKind.KL), 0.3), (TV(), 0.7), (Budgeted(), 1.3), (ConvexComb(0.3), 0.8), (Symmetric(), 0.6)]:
            f = rng.normal(size=6)
            d = DiscreteDistribution(f, rng.dirichlet(np.ones(6)))
            res = worst_case(d, spec, eps)
            assert res.weights.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(res.weights >= 0.0)
            assert res.value == pytest.approx(float(res.weights @ d.values), abs=1e-9)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            worst_case(D123, TV(), -0.1)
        with pytest.raises(DomainError):
            worst_case(D123, TV(), 2.5)
        with pytest.raises(DomainError):
            worst_case(D123, ConvexComb(0.5), 1.2)
        with pytest.raises(DomainError):
            worst_case(D123, Symmetric(), 1.2)

    def test_tv_full_drain_is_point_mass(self):
        res = worst_case(D321, TV(), 2.0)
        assert res.value == pytest.approx(3.0)
        np.testing.assert_allclose(res.weights, [1.0, 0.0, 0.0], atol=1e-12)

    def test_symmetric_eps_one_is_max(self):
        res = worst_case(D123, Symmetric(), 1.0)
        assert res.value == pytest.approx(3.0)


class TestBoxBounds:
    def test_budgeted_and_convex_comb_respect_bounds(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            n = rng.integers(2, 8)
            d = DiscreteDistribution(rng.normal(size=n), rng.dirichlet(np.ones(n)))
            eps = rng.uniform(0.0, 2.0)
            q = worst_case(d, Budgeted(), eps).weights
            assert np.all(q <= (1 + eps) * d.probs + 1e-12)
            eps_c = rng.uniform(0.0, 1.0)
            alpha = rng.uniform(0.0, 0.9)
            q = worst_case(d, ConvexComb(alpha), eps_c).weights
            lo = (1 - eps_c) * d.probs
            hi = lo + eps_c / (1 - alpha) * d.probs
            assert np.all(q >= lo - 1e-12) and np.all(q <= hi + 1e-12)


class TestOracleEquivalence:
    def test_lp_families_match_vertex_enumeration(self):
        rng = np.random.default_rng(23)
        for _ in range(60):
            n = int(rng.integers(2, 7))
            f = rng.normal(size=n) * rng.uniform(0.3, 2.0)
            p = rng.dirichlet(np.ones(n))
            d = DiscreteDistribution(f, p)
            eps_tv = rng.uniform(0.0, 1.5)
            cands = tv_vertices(p, eps_tv)
            best = float((cands @ f).max())
            assert worst_case(d, TV(), eps_tv).value == pytest.approx(best, abs=1e-9)

            eps_b = rng.uniform(0.0, 2.0)
            cands = box_vertices(np.zeros(n), (1 + eps_b) * p)
            best = float((cands @ f).max())
            assert worst_case(d, Budgeted(), eps_b).value == pytest.approx(best, abs=1e-9)

            eps_c = rng.uniform(0.0, 1.0)
            alpha = rng.uniform(0.0, 0.9)
            lo = (1 - eps_c) * p
            cands = box_vertices(lo, lo + eps_c / (1 - alpha) * p)
            best = float((cands @ f).max())
            assert worst_case(d, ConvexComb(alpha), eps_c).value == pytest.approx(best, abs=1e-9)

    def test_smooth_families_against_ray_grid(self):
        rng = np.random.default_rng(29)
        for trial in range(12):
            n = int(rng.integers(2, 7))
            f = rng.normal(size=n)
            p = rng.dirichlet(np.ones(n))
            d = DiscreteDistribution(f, p)
            eps = rng.uniform(0.005, 0.3)
            for spec, div in [(SmoothPhi(), chi2_div), (SmoothPhi(PhiKind.KL), kl_div)]:
                v = worst_case(d, spec, eps).value
                cands = ray_candidates(p, eps, div, n_dirs=400, seed=trial)
                vals = cands @ f
                assert v >= float(vals.max()) - 1e-9
                _, sqp_val = sqp_divergence_max(f, p, eps, div)
                best = max(float(vals.max()), sqp_val)
                assert v >= best - 1e-9
                assert v - best <= 2e-3 * max(1.0, abs(v))

    def test_never_beaten_by_feasible_grid(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            f = rng.normal(size=n)
            p = rng.dirichlet(np.ones(n))
            d = DiscreteDistribution(f, p)
            grid = simplex_grid(n, 10)
            eps = rng.uniform(0.05, 0.8)
            alpha = rng.uniform(0.0, 0.8)
            for spec, fam, kw in [
                (TV(), "tv", {}),
                (Budgeted(), "budgeted", {}),
                (ConvexComb(alpha), "convex_comb", {"alpha": alpha}),
            ]:
                mask = feasible_mask(grid, p, fam, eps, **kw)
                if not mask.any():
                    continue
                best = float((grid[mask] @ f).max())
                assert worst_case(d, spec, eps).value >= best - 1e-9


class TestStructuralProperties:
    def test_monotone_concave_in_eps(self):
        rng = np.random.default_rng(41)
        d = DiscreteDistribution(rng.normal(size=7), rng.dirichlet(np.ones(7)))
        grids = {
            "chi2": (SmoothPhi(), np.linspace(0.01, 1.2, 25)),
            "kl": (SmoothPhi(PhiKind.KL), np.linspace(0.01, 1.2, 25)),
            "tv": (TV(), np.linspace(0.01, 1.9, 25)),
            "budgeted": (Budgeted(), np.linspace(0.01, 3.0, 25)),
        }
        scale = max(1.0, d.range())
        for spec, grid in grids.values():
            vals = np.array([worst_case(d, spec, e).value for e in grid])
            assert np.all(np.diff(vals) >= -1e-9 * scale)
            second = np.diff(vals, 2)
            assert np.all(second <= 1e-9 * scale)

    def test_budgeted_identity(self):
        rng = np.random.default_rng(43)
        for _ in range(25):
            n = int(rng.integers(2, 9))
            d = DiscreteDistribution(rng.normal(size=n), rng.dirichlet(np.ones(n)))
            eps = rng.uniform(0.0, 4.0)
            assert worst_case(d, Budgeted(), eps).value == d.cvar(eps / (1.0 + eps))

    def test_budgeted_piecewise_slope(self):
        assert budgeted_slope(D321, 0.25) == pytest.approx(1.0)
        rng = np.random.default_rng(47)
        for _ in range(20):
            n = int(rng.integers(2, 7))
            d = DiscreteDistribution(rng.normal(size=n), rng.dirichlet(np.ones(n)))
            # breakpoints at eps where the cap hits a cumulative probability
            cums = d.sorted_cum[:-1]
            bps = np.sort(np.unique((1.0 - cums) / cums))
            lo = 0.0
            for hi in list(bps) + [bps[-1] * 1.5 + 1.0]:
                if hi - lo < 1e-6:
                    lo = hi
                    continue
                e1 = lo + 0.3 * (hi - lo)
                e2 = lo + 0.7 * (hi - lo)
                v1 = worst_case(d, Budgeted(), e1).value
                v2 = worst_case(d, Budgeted(), e2).value
                slope = (v2 - v1) / (e2 - e1)
                assert slope == pytest.approx(budgeted_slope(d, e1), abs=1e-9)
                lo = hi


class TestPenaltyForm:
    def test_examples(self):
        assert penalty_sensitivity(D123, SmoothPhi()) == pytest.approx(2.0 / 3.0)
        const = DiscreteDistribution([3.0, 3.0], [0.4, 0.6])
        assert penalty_sensitivity(const, SmoothPhi()) == pytest.approx(0.0, abs=1e-12)
        d = DiscreteDistribution([0.0, 2.0], [0.5, 0.5])
        assert penalty_sensitivity(d, SmoothPhi(phi_dd=2.0)) == pytest.approx(0.5)

    def test_rejects_nonsmooth(self):
        with pytest.raises(UnsupportedFamilyError):
            penalty_sensitivity(D123, TV())


class TestFiniteDifference:
    def test_convex_comb_exact(self):
        slopes = finite_difference_slope(D123, ConvexComb(0.5), [0.1, 0.3, 0.7])
        target = sensitivity(D123, ConvexComb(0.5)).value
        for _, s in slopes:
            assert s == pytest.approx(target, abs=1e-12)

    def test_chi2_exact(self):
        slopes = finite_difference_slope(D123, SmoothPhi(), [1e-4, 1e-3, 1e-2])
        target = sensitivity(D123, SmoothPhi()).value
        for _, s in slopes:
            assert s == pytest.approx(target, abs=1e-9)

    def test_budgeted_first_piece(self):
        slopes = finite_difference_slope(D321, Budgeted(), [0.1, 0.2, 0.4])
        for _, s in slopes:
            assert s == pytest.approx(1.0, abs=1e-12)

    def test_grid_validation(self):
        with pytest.raises(DomainError):
            finite_difference_slope(D123, TV(), [0.2, 0.1])
        with pytest.raises(DomainError):
            finite_difference_slope(D123, TV(), [0.0, 0.1])


class TestCustomPhi:
    def test_custom_chi2_conjugate_matches_closed_form(self):
        spec = SmoothPhi(
            PhiKind.CUSTOM,
            phi_dd=1.0,
            phi_conj=lambda z: z + 0.5 * z * z if z >= -1.0 else -0.5,
            phi_conj_prime=lambda z: max(1.0 + z, 0.0),
        )
        for eps in (0.01, 0.12, 0.5):
            ref = worst_case(D123, SmoothPhi(), eps)
            res = worst_case(D123, spec, eps)
            assert res.value == pytest.approx(ref.value, abs=1e-8)
            np.testing.assert_allclose(res.weights, ref.weights, atol=1e-7)

    def test_custom_kl_conjugate_matches_tilt(self):
        spec = SmoothPhi(
            PhiKind.CUSTOM,
            phi_dd=1.0,
            phi_conj=lambda z: np.exp(z) - 1.0,
            phi_conj_prime=lambda z: np.exp(z),
        )
        rng = np.random.default_rng(53)
        d = DiscreteDistribution(rng.normal(size=5), rng.dirichlet(np.ones(5)))
        for eps in (0.01, 0.1):
            ref = worst_case(d, SmoothPhi(PhiKind.KL), eps)
            res = worst_case(d, spec, eps)
            assert res.value == pytest.approx(ref.value, abs=1e-8)

    def test_custom_requires_conjugates(self):
        with pytest.raises(Exception):
            SmoothPhi(PhiKind.CUSTOM)
