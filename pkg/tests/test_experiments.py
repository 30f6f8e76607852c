import json

import numpy as np
import pytest

from hawkesbin.experiments import METHODS, MseTable, StudyConfig, cell_rng, default_threads, run_study


def biased(b):
    def method(realization, series, family, truth):
        return truth + b, True
    method.uses_bins = True
    return method


def noisy(realization, series, family, truth):
    # error variance 1/T, from the realisation's own event count
    T = realization.T
    z = np.sin(np.arange(1, len(truth) + 1) * (len(realization.times) + 1.0))
    return truth + z * np.sqrt(2.0 / T), True


def failing(realization, series, family, truth):
    raise ValueError("no fit")


SMALL = dict(T_grid=(50, 100), replicates=10, seed=3)


class TestConfig:
    def test_defaults_and_round_trip(self, tmp_path):
        c = StudyConfig()
        assert c.T_grid == (100.0, 250.0, 500.0, 1000.0) and c.replicates == 100
        p = tmp_path / "c.json"
        p.write_text(json.dumps(c.to_dict()))
        assert StudyConfig.from_file(p) == c

    @pytest.mark.parametrize("bad", [dict(replicates=5), dict(T_grid=()), dict(delta_grid=(0,)),
                                     dict(truth={"eta": 1}), dict(bogus=1)])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            StudyConfig.from_dict(bad)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            run_study(StudyConfig(methods=("nope",), **SMALL))

    def test_threads_env(self, monkeypatch):
        monkeypatch.setenv("HAWKESBIN_THREADS", "3")
        assert default_threads() == 3
        monkeypatch.setenv("HAWKESBIN_THREADS", "x")
        assert default_threads() == 1


class TestAggregation:
    def test_constant_bias(self):
        b = np.array([0.1, -0.2, 0.3])
        t = run_study(StudyConfig(delta_grid=(1, 2), **SMALL), methods={"m": biased(b)})
        for delta in (1.0, 2.0):
            for i, name in enumerate(["eta", "mu", "beta"]):
                row = t.row("m", 100, delta, name)
                assert row.mse == pytest.approx(b[i] ** 2, rel=1e-12)
                assert row.n_used == 10 and row.n_excluded == 0
                assert t.slopes[("m", delta, name)] == 0.0

    def test_failures_are_excluded(self):
        t = run_study(StudyConfig(**SMALL), methods={"f": failing})
        r = t.row("f", 50, None, "mu")
        assert r.n_used == 0 and r.n_excluded == 10 and np.isnan(r.mse)
        assert t.slopes[("f", None, "mu")] is None
        assert all(v["mse"] is None for v in t.to_dict()["rows"])

    def test_mse_matches_estimates(self):
        t = run_study(StudyConfig(**SMALL), methods={"n": noisy})
        est = t.cell("n", 100)
        truth = StudyConfig().theta0
        np.testing.assert_allclose(t.row("n", 100, None, "beta").mse, np.mean((est[:, 2] - truth[2]) ** 2))

    def test_monte_carlo_error_shrinks(self):
        se = []
        for R in (25, 100):
            t = run_study(StudyConfig(T_grid=(100,), replicates=R, seed=1), methods={"n": noisy})
            se.append(t.row("n", 100, None, "eta").mse_se)
        assert se[1] / se[0] == pytest.approx(0.5, rel=0.35)


class TestDeterminism:
    def test_same_seed_same_bytes(self):
        c = StudyConfig(**SMALL)
        a, b = run_study(c), run_study(c)
        assert a.to_csv() == b.to_csv() and a.to_json() == b.to_json()

    def test_cell_rng_independent_of_grid(self):
        x = cell_rng(0, 100.0, 4).random(3)
        np.testing.assert_array_equal(x, cell_rng(0, 100.0, 4).random(3))
        assert not np.array_equal(x, cell_rng(0, 250.0, 4).random(3))
        sub = run_study(StudyConfig(T_grid=(100,), replicates=10, seed=3))
        full = run_study(StudyConfig(**SMALL))
        np.testing.assert_array_equal(sub.cell("whittle", 100, 1), full.cell("whittle", 100, 1))

    def test_worker_count_does_not_matter(self):
        c = StudyConfig(**SMALL)
        assert run_study(c, threads=1).to_csv() == run_study(c, threads=2).to_csv()


def test_table_csv_header():
    t = MseTable([], {})
    assert t.to_csv().splitlines() == ["method,T,delta,parameter,mean,mse,mse_se,n_used,n_excluded"]
    assert set(METHODS) == {"whittle", "mle"}


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="boundary-ridge fits at T=250 steepen the slope; about -1.46 at R=400")
def test_whittle_mse_decays_at_root_n_rate():
    t = run_study(StudyConfig(T_grid=(250, 500, 1000), replicates=100, seed=11))
    assert -1.5 <= t.slopes[("whittle", 1.0, "mu")] <= -0.5


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="eta's shrinking bias gives slope -0.71 (mu: -0.42); neither reaches -1")
def test_heavy_tail_power_law_does_not_reach_root_n_rate():
    c = StudyConfig(family="powerlaw:a=1.5", truth={"eta": 1.0, "mu": 0.5, "gamma": 0.5},
                    T_grid=(250, 500, 1000), replicates=100, seed=12)
    t = run_study(c)
    slopes = {p: t.slopes[("whittle", 1.0, p)] for p in ("eta", "mu")}
    assert all(s > -0.5 for s in slopes.values()), slopes
