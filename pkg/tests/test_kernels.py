import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from hawkesbin.kernels import Exponential, Gaussian, PowerLaw, parse_kernel
from hawkesbin.kernels import parse_family

KERNELS = [Exponential(1.3), PowerLaw(2.5, 1.5), PowerLaw(0.5, 1.0), Gaussian(9.8, 5.9), Gaussian(-1.0, 0.3)]


def _support(k):
    if k.causal:
        return 0.0, np.inf
    return -np.inf, np.inf


def _quad_fourier(k, w):
    lo, hi = _support(k)
    if isinstance(k, Gaussian):
        lo, hi = k.nu - 40 * k.sigma, k.nu + 40 * k.sigma
    if np.isinf(hi):
        # oscillatory tail handled by QAWF
        re = integrate.quad(k.density, lo, np.inf, weight="cos", wvar=w)[0]
        im = integrate.quad(k.density, lo, np.inf, weight="sin", wvar=w)[0]
    else:
        re = integrate.quad(lambda t: k.density(t) * np.cos(w * t), lo, hi, limit=400)[0]
        im = integrate.quad(lambda t: k.density(t) * np.sin(w * t), lo, hi, limit=400)[0]
    return re - 1j * im


class TestDensities:
    @pytest.mark.parametrize("k", KERNELS, ids=repr)
    def test_density_integrates_to_one(self, k):
        lo, hi = _support(k)
        assert integrate.quad(k.density, lo, hi, limit=400)[0] == pytest.approx(1.0, abs=1e-7)

    @pytest.mark.parametrize("k", KERNELS, ids=repr)
    def test_cdf_matches_integrated_density(self, k):
        lo, _ = _support(k)
        for t in [0.3, 2.0, 11.0]:
            start = lo if np.isfinite(lo) else -200.0
            assert k.cdf(t) == pytest.approx(integrate.quad(k.density, start, t, limit=400)[0], abs=1e-8)

    def test_causal_kernels_vanish_before_zero(self):
        for k in (Exponential(2.0), PowerLaw(2.5, 1.5)):
            assert np.all(k.density([-3.0, -1e-9]) == 0)
            assert np.all(k.cdf([-3.0, -1e-9]) == 0)

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            Exponential(0.0)
        with pytest.raises(ValueError):
            PowerLaw(-1.0, 1.0)
        with pytest.raises(ValueError):
            Gaussian(0.0, 0.0)
        with pytest.raises(ValueError):
            Gaussian(np.inf, 1.0)


class TestFourier:
    @pytest.mark.parametrize("k", KERNELS, ids=repr)
    def test_against_quadrature(self, k):
        for w in [0.1, 0.7, 2.5]:
            assert k.fourier(w) == pytest.approx(_quad_fourier(k, w), abs=1e-7)

    @pytest.mark.parametrize("k", KERNELS, ids=repr)
    def test_unit_mass_at_zero(self, k):
        assert k.fourier(0.0) == pytest.approx(1.0, abs=1e-12)

    def test_exponential_closed_form(self):
        w = np.linspace(-20, 20, 41)
        np.testing.assert_allclose(Exponential(2.0).fourier(w), 2.0 / (2.0 + 1j * w), rtol=1e-14)

    @pytest.mark.parametrize("gamma,a", [(2.5, 1.5), (0.5, 1.0), (2.0, 0.7), (1.0, 2.0), (7.3, 0.2)])
    def test_powerlaw_against_mpmath(self, gamma, a):
        # gamma * e^z E_{gamma+1}(z), z = i x a, with E_s evaluated by mpmath
        k = PowerLaw(gamma, a)
        mpmath.mp.dps = 30
        for x in [1e-3, 0.4, 2.0, 8.0, 45.0, 400.0]:
            z = mpmath.mpc(0, x * a)
            ref = complex(gamma * mpmath.exp(z) * mpmath.expint(gamma + 1, z))
            assert abs(k.fourier(x) - ref) < 1e-11 * max(1.0, abs(ref))

    @pytest.mark.parametrize("gamma", [12.0, 20.0, 30.0])
    def test_powerlaw_large_tail_index(self, gamma):
        k = PowerLaw(gamma, 1.5)
        mpmath.mp.dps = 30
        for x in np.geomspace(1e-3, 200.0, 40):
            z = mpmath.mpc(0, x * 1.5)
            ref = complex(gamma * mpmath.exp(z) * mpmath.expint(gamma + 1, z))
            assert abs(k.fourier(x) - ref) < 1e-9

    def test_powerlaw_transform_cap(self):
        with pytest.raises(ValueError):
            PowerLaw(31.0, 1.5).fourier(1.0)

    @given(st.floats(0.05, 8.0), st.floats(0.1, 5.0), st.floats(-200.0, 200.0))
    def test_powerlaw_bounded_and_hermitian(self, gamma, a, x):
        k = PowerLaw(gamma, a)
        v = k.fourier(x)
        assert abs(v) <= 1.0 + 1e-12
        assert k.fourier(-x) == pytest.approx(np.conj(v), abs=1e-13)


class TestMoments:
    @pytest.mark.parametrize("k", [Exponential(1.3), PowerLaw(2.5, 1.5), Gaussian(9.8, 5.9)], ids=repr)
    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
    def test_against_quadrature(self, k, p):
        lo, hi = _support(k)
        pts = None
        if isinstance(k, Gaussian):
            lo, hi, pts = k.nu - 40 * k.sigma, k.nu + 40 * k.sigma, [0.0]
        ref = integrate.quad(lambda t: abs(t) ** p * k.density(t), lo, hi, points=pts, limit=400)[0]
        assert k.moment(p) == pytest.approx(ref, rel=1e-7)

    def test_powerlaw_moment_infinite_beyond_tail_index(self):
        assert PowerLaw(2.5, 1.5).moment(2.5) == np.inf
        assert PowerLaw(0.5, 1.0).moment(1.0) == np.inf


class TestSampling:
    @pytest.mark.parametrize("k", KERNELS, ids=repr)
    def test_samples_follow_cdf(self, k, rng):
        x = k.sample(rng, 20000)
        assert stats.kstest(x, k.cdf).pvalue > 1e-3


class TestParsing:
    def test_full_spec(self):
        assert parse_kernel("exp:beta=1") == Exponential(1.0)
        assert parse_kernel("powerlaw:gamma=2.5,a=1.5") == PowerLaw(2.5, 1.5)
        assert parse_kernel("gaussian:nu=9.8,sigma=5.9") == Gaussian(9.8, 5.9)

    def test_round_trip(self):
        for k in KERNELS:
            assert parse_kernel(k.spec()) == k

    def test_partial_family(self):
        assert parse_family("powerlaw:a=1.5") == ("powerlaw", {"a": 1.5})

    @pytest.mark.parametrize("text", ["bogus", "exp:gamma=1", "exp:beta", "exp:beta=x", "exp:beta=-1"])
    def test_errors(self, text):
        with pytest.raises(ValueError):
            parse_kernel(text)
