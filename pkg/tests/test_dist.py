import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wcsens import DiscreteDistribution, RiskLevel
from wcsens.errors import DataFormatError, DistributionError
from wcsens.dist import load_distribution_csv

from oracles import box_vertices


def uniform(values):
    return DiscreteDistribution.uniform(np.asarray(values, dtype=float))


class TestMoments:
    def test_mean(self):
        assert uniform([1, 2, 3]).mean() == pytest.approx(2.0)
        assert DiscreteDistribution([5.0], [1.0]).mean() == 5.0
        d = DiscreteDistribution([0.0, 10.0], [0.9, 0.1])
        assert d.mean() == pytest.approx(1.0)

    def test_variance_and_friends(self):
        assert uniform([1, 2, 3]).variance() == pytest.approx(2.0 / 3.0)
        assert DiscreteDistribution([4.0], [1.0]).range() == 0.0
        assert DiscreteDistribution([0.0, 2.0], [0.5, 0.5]).stdev() == pytest.approx(1.0)
        d = uniform([4, 3, 2, 1])
        assert d.min() == 1.0 and d.max() == 4.0 and d.range() == 3.0


class TestTailStats:
    def test_var_quantile(self):
        d = uniform([4, 3, 2, 1])
        assert d.var_quantile(0.6) == 3.0
        assert d.var_quantile(0.0) == 1.0
        assert DiscreteDistribution([5.0], [1.0]).var_quantile(0.9) == 5.0

    def test_var_knife_edge(self):
        # cumulative mass of the top two atoms is exactly 1 - beta = 0.5:
        # the smaller-index convention returns the third largest value
        d = uniform([4, 3, 2, 1])
        assert d.var_quantile(0.5) == 2.0

    def test_cvar_examples(self):
        assert uniform([3, 2, 1]).cvar(1.0 / 6.0) == pytest.approx(2.2)
        assert uniform([4, 3, 2, 1]).cvar(0.6) == pytest.approx(3.625)
        d = uniform([7, 1, 3])
        assert d.cvar(0.0) == pytest.approx(d.mean())

    def test_cvar_deviation(self):
        assert uniform([1, 2, 3]).cvar_deviation(0.5) == pytest.approx(2.0 / 3.0)
        assert DiscreteDistribution([2.0], [1.0]).cvar_deviation(0.7) == pytest.approx(0.0)
        assert uniform([4, 3, 2, 1]).cvar_deviation(0.6) == pytest.approx(1.125)

    def test_cvar_monotone_and_caps(self):
        d = DiscreteDistribution([3.0, -1.0, 0.5, 2.0], [0.2, 0.3, 0.4, 0.1])
        levels = np.linspace(0.0, 0.99, 40)
        vals = [d.cvar(a) for a in levels]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        assert d.cvar(0.0) == pytest.approx(d.mean())
        assert d.cvar(0.9) == pytest.approx(d.max())  # alpha >= 1 - p_(1) = 0.8

    def test_var_below_cvar(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = rng.integers(1, 9)
            d = DiscreteDistribution(rng.normal(size=n), rng.dirichlet(np.ones(n)))
            beta = rng.uniform(0, 0.95)
            assert d.var_quantile(beta) <= d.cvar(beta) + 1e-12

    def test_cvar_matches_lp_vertices(self):
        # dense enumeration of basic solutions of the tail LP, n <= 8
        rng = np.random.default_rng(7)
        for _ in range(60):
            n = rng.integers(2, 9)
            f = rng.normal(size=n) * 2
            p = rng.dirichlet(np.ones(n))
            d = DiscreteDistribution(f, p)
            alpha = rng.uniform(0, 0.9)
            verts = box_vertices(np.zeros(n), p / (1.0 - alpha))
            assert d.cvar(alpha) == pytest.approx(float((verts @ f).max()), abs=1e-9)

    def test_upper_tail_excess(self):
        d = uniform([4, 3, 2, 1])
        np.testing.assert_allclose(d.upper_tail_excess(0.6).values, [1, 0, 0, 0])
        const = DiscreteDistribution([2.0, 2.0], [0.5, 0.5])
        assert const.upper_tail_excess(0.5).values.max() == 0.0
        d2 = DiscreteDistribution([10.0, 0.0], [0.1, 0.9])
        np.testing.assert_allclose(d2.upper_tail_excess(0.5).values, [10, 0])


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-50, 50), min_size=1, max_size=12),
    st.randoms(use_true_random=False),
    st.floats(0, 0.97),
)
def test_permutation_invariance(values, rnd, alpha):
    n = len(values)
    raw = [rnd.random() + 0.05 for _ in range(n)]
    probs = np.array(raw) / sum(raw)
    d = DiscreteDistribution(np.array(values), probs)
    perm = list(range(n))
    rnd.shuffle(perm)
    d2 = DiscreteDistribution(np.array(values)[perm], probs[perm])
    assert d2.mean() == pytest.approx(d.mean(), abs=1e-12)
    assert d2.variance() == pytest.approx(d.variance(), abs=1e-10)
    assert d2.var_quantile(alpha) == d.var_quantile(alpha)
    assert d2.cvar(alpha) == pytest.approx(d.cvar(alpha), abs=1e-10)


class TestConstruction:
    def test_rejects_bad_input(self):
        with pytest.raises(DistributionError):
            DiscreteDistribution([], [])
        with pytest.raises(DistributionError):
            DiscreteDistribution([1.0], [0.5])
        with pytest.raises(DistributionError):
            DiscreteDistribution([1.0, 2.0], [0.5, 0.0 + 0.5 + 1e-6])
        with pytest.raises(DistributionError):
            DiscreteDistribution([1.0, 2.0], [1.0, 0.0])
        with pytest.raises(DistributionError):
            DiscreteDistribution([np.inf], [1.0])

    def test_renormalization_within_tolerance(self):
        p = np.array([0.5, 0.5 + 4e-13])
        d = DiscreteDistribution([1.0, 2.0], p)
        assert d.renormalized
        assert d.probs.sum() == pytest.approx(1.0, abs=2e-16)

    def test_dropping_zero_atoms(self):
        d = DiscreteDistribution.dropping_zero_atoms([1.0, 2.0, 3.0], [0.5, 0.0, 0.5])
        assert d.n == 2 and d.dropped_zero_atoms == 1
        with pytest.raises(DistributionError):
            DiscreteDistribution.dropping_zero_atoms([1.0], [-0.1])

    def test_immutable(self):
        d = uniform([1, 2, 3])
        with pytest.raises(ValueError):
            d.values[0] = 9.0

    def test_risk_level_domain(self):
        with pytest.raises(DistributionError):
            RiskLevel(1.0)
        with pytest.raises(DistributionError):
            RiskLevel(-0.1)


class TestCsv:
    def test_two_column(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("value,prob\n1,0.25\n2,0.25\n3,0.5\n", encoding="utf-8")
        d = load_distribution_csv(path)
        assert d.n == 3 and d.mean() == pytest.approx(2.25)

    def test_samples_only(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("value\n1\n2\n3\n4\n", encoding="utf-8")
        d = load_distribution_csv(path)
        np.testing.assert_allclose(d.probs, 0.25)

    def test_errors(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("value,prob\n1,x\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match="row 2 column 2"):
            load_distribution_csv(bad)
        hdr = tmp_path / "hdr.csv"
        hdr.write_text("foo,bar\n1,2\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match="header"):
            load_distribution_csv(hdr)
        empty = tmp_path / "empty.csv"
        empty.write_text("", encoding="utf-8")
        with pytest.raises(DataFormatError):
            load_distribution_csv(empty)
        only_header = tmp_path / "oh.csv"
        only_header.write_text("value\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match="no data"):
            load_distribution_csv(only_header)
