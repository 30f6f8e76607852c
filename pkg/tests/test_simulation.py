import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from hawkesbin.kernels import Exponential, Gaussian, PowerLaw
from hawkesbin.simulation import (HawkesModel, PiecewiseConstantRate, PointRealization, bin_counts,
                                  gw_moments, mean_intensity, replicate_rng, same_bin_probability,
                                  simulate, simulate_clusters, thin)


class TestModel:
    @pytest.mark.parametrize("mu", [1.0, 1.2, -0.1])
    def test_rejects_explosive_or_negative_branching(self, mu):
        with pytest.raises(ValueError):
            HawkesModel(1.0, mu, Exponential(1.0))

    @pytest.mark.parametrize("eta", [0.0, -1.0, np.inf, np.nan])
    def test_rejects_bad_immigration(self, eta):
        with pytest.raises(ValueError):
            HawkesModel(eta, 0.5, Exponential(1.0))

    def test_mean_intensity(self):
        assert mean_intensity(HawkesModel(1.0, 0.5, Exponential(1.0))) == 2.0

    def test_time_varying_rate_needs_bound(self):
        with pytest.raises(ValueError):
            PiecewiseConstantRate((10.0,), (1.0, 2.0))
        with pytest.raises(ValueError):
            PiecewiseConstantRate((10.0,), (1.0, 2.0), bound=1.5)


class TestSimulate:
    def test_integer_seed_reproducible(self):
        m = HawkesModel(1.0, 0.5, Exponential(1.0))
        a, b = simulate(m, 200.0, rng=7), simulate(m, 200.0, rng=7)
        np.testing.assert_array_equal(a.times, b.times)
        assert a.seed == 7

    def test_replicate_streams_differ(self):
        m = HawkesModel(1.0, 0.5, Exponential(1.0))
        a = simulate(m, 100.0, rng=replicate_rng(1, 0))
        b = simulate(m, 100.0, rng=replicate_rng(1, 1))
        assert len(a.times) != len(b.times) or not np.array_equal(a.times, b.times)

    @given(st.integers(0, 10_000))
    def test_times_sorted_simple_and_in_window(self, seed):
        m = HawkesModel(0.8, 0.6, PowerLaw(1.5, 0.5))
        r = simulate(m, 50.0, rng=seed)
        assert np.all(np.diff(r.times) > 0)
        assert r.times.min(initial=0.0) >= 0.0 and r.times.max(initial=0.0) <= 50.0

    def test_poisson_when_no_offspring(self):
        m = HawkesModel(3.0, 0.0, Exponential(1.0))
        c = bin_counts(simulate(m, 20000.0, rng=3), 1.0).counts
        assert c.mean() == pytest.approx(3.0, abs=4 * np.sqrt(3.0 / len(c)))
        assert c.var() == pytest.approx(3.0, rel=0.05)

    @pytest.mark.parametrize("kernel", [Exponential(1.0), PowerLaw(2.5, 1.5), Gaussian(3.0, 1.0)], ids=repr)
    def test_mean_rate(self, kernel):
        # stationary rate eta / (1 - mu); clusters counted over many windows
        m = HawkesModel(1.0, 0.5, kernel)
        rates = [len(simulate(m, 500.0, rng=replicate_rng(11, i)).times) / 500.0 for i in range(40)]
        se = np.std(rates, ddof=1) / np.sqrt(len(rates))
        assert np.mean(rates) == pytest.approx(2.0, abs=4 * se)

    def test_piecewise_immigration(self):
        eta = PiecewiseConstantRate((500.0,), (1.0, 3.0), bound=3.0)
        m = HawkesModel(eta, 0.0, Exponential(1.0))
        t = simulate(m, 1000.0, rng=5).times
        first, second = np.sum(t <= 500.0), np.sum(t > 500.0)
        assert first == pytest.approx(500, abs=4 * np.sqrt(500))
        assert second == pytest.approx(1500, abs=4 * np.sqrt(1500))

    def test_invalid_window(self):
        m = HawkesModel(1.0, 0.5, Exponential(1.0))
        with pytest.raises(ValueError):
            simulate(m, 0.0)
        with pytest.raises(ValueError):
            simulate(m, 10.0, burnin=-1.0)

    def test_thin_keeps_fraction(self, rng):
        r = PointRealization(np.sort(rng.uniform(0, 1000, 20000)), 1000.0)
        kept = thin(r, 0.3, rng)
        assert len(kept.times) == pytest.approx(6000, abs=4 * np.sqrt(20000 * 0.21))


class TestBinCounts:
    def test_half_open_bins(self):
        r = PointRealization(np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0]), 3.0)
        s = bin_counts(r, 1.0)
        assert s.counts.tolist() == [2, 2, 1]
        assert s.discarded == 1

    def test_partial_last_bin_dropped(self):
        r = PointRealization(np.array([0.2, 3.2]), 3.5)
        s = bin_counts(r, 1.0)
        assert s.n == 3 and s.counts.sum() == 1 and s.discarded == 1

    @given(st.lists(st.floats(0.0, 100.0, exclude_min=True), max_size=200), st.floats(0.1, 10.0))
    def test_counts_plus_discarded_is_total(self, times, delta):
        r = PointRealization(np.sort(np.array(times, dtype=float)), 100.0)
        s = bin_counts(r, delta)
        assert s.counts.sum() + s.discarded == len(times)
        assert np.all(s.counts >= 0)

    def test_rejects_bad_width(self):
        r = PointRealization(np.array([0.5]), 1.0)
        with pytest.raises(ValueError):
            bin_counts(r, 0.0)
        with pytest.raises(ValueError):
            bin_counts(r, 2.0)


class TestSameBinProbability:
    def test_reference_value(self):
        assert round(same_bin_probability(1.0, 2.0), 2) == 0.57

    @given(st.floats(0.01, 20.0), st.floats(0.01, 20.0))
    def test_matches_quadrature(self, beta, delta):
        # parent uniform in its bin, offspring exponential after it
        ref = integrate.quad(lambda u: -np.expm1(-beta * (delta - u)), 0.0, delta)[0] / delta
        assert same_bin_probability(beta, delta) == pytest.approx(ref, rel=1e-9, abs=1e-12)


class TestGaltonWatson:
    @given(st.floats(0.01, 0.99), st.integers(0, 30))
    def test_formulas_match_recursions(self, mu, k):
        # E Z_{k+1} = mu E Z_k;  Var Z_{k+1} = mu^2 Var Z_k + mu E Z_k
        mean, var = 1.0, 0.0
        for _ in range(k):
            mean, var = mu * mean, mu**2 * var + mu * mean
        m = gw_moments(mu, k)
        assert m.mean == pytest.approx(mean, rel=1e-12)
        assert m.var == pytest.approx(var, rel=1e-10, abs=1e-300)
        assert m.product == pytest.approx(var + mean**2, rel=1e-10)

    @given(st.floats(0.01, 0.99), st.integers(0, 10), st.integers(0, 10))
    def test_cross_moments(self, mu, k, h):
        # Cov(Z_k, Z_{k+h}) = mu^h Var Z_k by conditioning on Z_k
        m = gw_moments(mu, k, k + h)
        assert m.cov == pytest.approx(mu**h * gw_moments(mu, k).var, rel=1e-10, abs=1e-300)
        assert m.product == pytest.approx(m.cov + mu ** (2 * k + h), rel=1e-10)

    def test_simulated_generations(self, rng):
        mu = 0.5
        Z = simulate_clusters(mu, Exponential(1.0), 20000, rng)
        assert np.all(Z[:, 0] == 1)
        for k in range(1, 5):
            m = gw_moments(mu, k)
            se = np.sqrt(m.var / len(Z))
            assert Z[:, k].mean() == pytest.approx(m.mean, abs=4 * se)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            gw_moments(1.0, 2)
        with pytest.raises(ValueError):
            gw_moments(0.5, 3, 2)
