import dataclasses
import json

import numpy as np
import pytest
from scipy import integrate

from hawkesbin.kernels import Exponential
from hawkesbin.params import ModelFamily
from hawkesbin.periodogram import Periodogram, compute_periodogram
from hawkesbin.simulation import BinCountSeries, HawkesModel, bin_counts, simulate
from hawkesbin.spectral import binned_spectral_density
from hawkesbin.whittle import (MIN_SERIES_LENGTH, fisher_information, fisher_matrix, fit, fit_periodogram,
                               parametric_bootstrap, whittle_objective)

from oracles import exp_fold_closed_form


def synthetic(model, delta, n):
    """Periodogram equal to the model density: the objective's exact minimiser."""
    f = binned_spectral_density(model, delta, 2 * np.pi * np.arange(n) / n)
    f[0] = 0.0
    return Periodogram(n, f, True)


class TestObjective:
    @pytest.mark.parametrize("n", [64, 65])
    def test_matches_full_sum(self, n, rng):
        m = HawkesModel(1.0, 0.5, Exponential(1.0))
        pg = compute_periodogram(rng.poisson(2.0, n))
        j = np.arange(1, n)
        f = binned_spectral_density(m, 1.0, 2 * np.pi * j / n)
        ref = np.sum(np.log(f) + pg.ordinates[j] / f) / (2 * n)
        assert whittle_objective(m, pg, 1.0) == pytest.approx(ref, rel=1e-12)

    def test_truth_minimises_expected_objective(self):
        m = HawkesModel(1.0, 0.5, Exponential(1.0))
        pg = synthetic(m, 1.0, 256)
        base = whittle_objective(m, pg, 1.0)
        for other in (HawkesModel(1.1, 0.5, Exponential(1.0)), HawkesModel(1.0, 0.45, Exponential(1.0)),
                      HawkesModel(1.0, 0.5, Exponential(1.3))):
            assert whittle_objective(other, pg, 1.0) > base


class TestSyntheticRecovery:
    @pytest.mark.parametrize("family,truth,init,delta", [
        ("exp", [1.0, 0.5, 1.0], [0.6, 0.3, 2.0], 1.0),
        ("exp", [0.5, 0.7, 2.0], [1.0, 0.5, 1.0], 0.5),
        ("powerlaw:a=1.5", [1.0, 0.5, 2.5], [0.7, 0.4, 1.5], 1.0),
        ("gauss", [0.04, 0.72, 9.8, 5.9], [0.05, 0.5, 7.0, 4.0], 7.0),
    ])
    def test_exact_periodogram_gives_truth(self, family, truth, init, delta):
        fam = ModelFamily.parse(family)
        pg = synthetic(fam.model(truth), delta, 512)
        res = fit_periodogram(pg, delta, fam, init)
        assert res.converged
        np.testing.assert_allclose(res.estimate, truth, rtol=1e-4)

    def test_raw_and_transformed_agree(self):
        fam = ModelFamily("exp")
        pg = synthetic(fam.model([1.0, 0.5, 1.0]), 1.0, 512)
        a = fit_periodogram(pg, 1.0, fam, [0.8, 0.4, 1.5], coordinates="transformed")
        b = fit_periodogram(pg, 1.0, fam, [0.8, 0.4, 1.5], coordinates="raw")
        np.testing.assert_allclose(a.estimate, b.estimate, rtol=1e-4)


@pytest.fixture(scope="module")
def series():
    m = HawkesModel(1.0, 0.5, Exponential(1.0))
    return bin_counts(simulate(m, 4000.0, rng=99), 1.0)


class TestFit:
    def test_recovers_within_standard_errors(self, series):
        res = fit(series, "exp")
        assert res.converged and res.method == "whittle" and res.c4_omitted
        z = (res.estimate - [1.0, 0.5, 1.0]) / res.std_errors
        assert np.all(np.abs(z) < 4)

    def test_dict_init_and_bounds(self, series):
        res = fit(series, "exp", init={"eta": 1.0, "mu": 0.5, "beta": 1.0}, bounds={"beta": (0.1, 5.0)})
        assert 0.1 < res.params["beta"] < 5.0

    def test_report_is_strict_json(self, series):
        d = fit(series, "exp").to_dict()
        json.dumps(d, allow_nan=False)
        assert set(d["parameters"]) == {"eta", "mu", "beta"}
        assert d["aliasing_terms"] >= 1

    def test_model_property(self, series):
        res = fit(series, "exp")
        assert isinstance(res.model, HawkesModel) and res.model.kernel.beta == res.params["beta"]

    def test_physical_units(self, series):
        # the same counts declared as 7-unit bins rescale rates and time scales by 7
        a = fit(series, "exp")
        b = fit(BinCountSeries(series.counts, 7.0), "exp")
        assert b.params["eta"] == pytest.approx(a.params["eta"] / 7, rel=1e-3)
        assert b.params["beta"] == pytest.approx(a.params["beta"] / 7, rel=1e-3)
        assert b.params["mu"] == pytest.approx(a.params["mu"], rel=1e-3)

    @pytest.mark.parametrize("counts,match", [
        (np.ones(MIN_SERIES_LENGTH - 1, dtype=int), "too short"),
        (np.zeros(100, dtype=int), "all-zero"),
        (np.r_[np.ones(99, dtype=int), -1], "non-negative"),
    ])
    def test_rejects_bad_series(self, counts, match):
        with pytest.raises(ValueError, match=match):
            fit(BinCountSeries(counts, 1.0), "exp")

    def test_near_bounds(self, series):
        res = fit(series, "exp", bounds={"beta": (0.1, 5.0)})
        assert res.near_bounds() == [] and res.to_dict()["diagnostics"]["near_bounds"] == []
        ridge = dataclasses.replace(res, estimate=np.array([1e-5, 0.9999, 4.9999]))
        assert ridge.near_bounds() == ["eta", "mu", "beta"]
        assert "bounds" not in ridge.to_dict()

    def test_rejects_init_outside_bounds(self, series):
        with pytest.raises(ValueError, match="outside"):
            fit(series, "exp", init=[1.0, 1.5, 1.0])

    def test_bootstrap_covariance(self, series):
        res = fit(BinCountSeries(series.counts[:500], 1.0), "exp")
        boot = parametric_bootstrap(res, B=8, seed=1)
        assert boot["estimates"].shape[1] == 3
        assert boot["covariance"].shape == (3, 3)
        again = parametric_bootstrap(res, B=8, seed=1)
        np.testing.assert_array_equal(boot["estimates"], again["estimates"])


class TestFisher:
    @pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
    def test_exponential_against_closed_form_quadrature(self, delta):
        theta = np.array([1.0, 0.5, 1.0])

        def logf(t, w):
            return np.log(exp_fold_closed_form(t[0], t[1], t[2], delta, w))

        def grad(w):
            g = []
            for i in range(3):
                e = np.zeros(3)
                e[i] = 1e-5 * theta[i]
                g.append((logf(theta + e, w) - logf(theta - e, w)) / (2 * e[i]))
            return np.array(g)

        ref = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                ref[i, j] = integrate.quad(lambda w: grad(w)[i] * grad(w)[j], 0, np.pi,
                                           epsabs=1e-12, limit=200)[0] / (2 * np.pi)
        got = fisher_information(ModelFamily("exp"), theta, delta)
        np.testing.assert_allclose(got, ref, rtol=1e-5)

    def test_symmetric_positive_definite(self):
        M = fisher_information(ModelFamily.parse("powerlaw:a=1.5"), [1.0, 0.5, 2.5], 1.0)
        np.testing.assert_allclose(M, M.T)
        assert np.all(np.linalg.eigvalsh(M) > 0)

    def test_one_sided_steps_at_the_boundary(self):
        def logf(t, w):
            if t[0] <= 0:
                raise ValueError("outside the domain")
            return np.log(t[0]) + 0 * w

        M = fisher_matrix(logf, [1e-10], lower=[0.0], upper=[np.inf])
        # (1/2pi) int_0^pi t^-2 dw
        assert M[0, 0] == pytest.approx(0.5e20, rel=1e-5)
