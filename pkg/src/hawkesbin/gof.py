"""Spectral goodness-of-fit test on the smoothed normalised periodogram.

The statistic compares a kernel smoother of ``I_n(w_j) / f(w_j)`` with its
null expectation; with the Epanechnikov kernel on ``[-pi, pi]`` the centring
and scale are available in closed form (:func:`mu_h`, :data:`TAU`).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .periodogram import Periodogram
from .spectral import FoldEvaluator, SpectralConfig
from .whittle import WhittleFit, fit_periodogram

__all__ = [
    "epanechnikov",
    "mu_h",
    "TAU",
    "KERNEL_L2",
    "CHI2_95",
    "GofReport",
    "smoothed_ratio",
    "smoothing_mass",
    "gof_statistic",
    "gof_bootstrap",
    "gof_test",
    "q2_diagnostic",
    "fitted_density",
]

# int K^2 over [-pi, pi]
KERNEL_L2 = 12.0 * np.pi / 5.0
TAU = float(np.pi * np.sqrt(2672.0 / 385.0))
CHI2_95 = float(stats.chi2.ppf(0.95, 1))


def epanechnikov(x):
    """``K(x) = 3/2 (1 - (x/pi)^2)`` on ``|x| <= pi``; integrates to ``2 pi``."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= np.pi, 1.5 * (1.0 - (x / np.pi) ** 2), 0.0)


def mu_h(h: float) -> float:
    return KERNEL_L2 / np.sqrt(h)


@dataclass
class GofReport:
    statistic: float
    mu_h: float
    tau: float
    asymptotic_pvalue: float
    bandwidth: float
    n: int
    q2_curve: np.ndarray = field(repr=False, default=None)
    bootstrap_pvalue: float | None = None
    bootstrap_replicates: int = 0
    bootstrap_failures: int = 0
    chi2_95: float = CHI2_95

    def to_dict(self) -> dict:
        out = {
            "statistic": self.statistic,
            "mu_h": self.mu_h,
            "tau": self.tau,
            "asymptotic_pvalue": self.asymptotic_pvalue,
            "bandwidth": self.bandwidth,
            "n": self.n,
            "chi2_95": self.chi2_95,
            "bootstrap_pvalue": self.bootstrap_pvalue,
            "bootstrap_replicates": self.bootstrap_replicates,
            "bootstrap_failures": self.bootstrap_failures,
        }
        if self.q2_curve is not None:
            out["q2_exceedances"] = int(np.sum(self.q2_curve[:, 1] > self.chi2_95))
        return out


def fitted_density(pgram: Periodogram, fit: WhittleFit, config: SpectralConfig = SpectralConfig()) -> np.ndarray:
    """Fitted spectral density on the full Fourier grid ``j = 0..n-1``."""
    K = fit.extra.get("aliasing_terms") or config.aliasing_terms
    if K is None:
        from .spectral import aliasing_terms_needed
        K = aliasing_terms_needed(fit.model, fit.delta, config)
    return FoldEvaluator(pgram.frequencies, fit.delta, K, config.tail_correction)(fit.model)


def _ratios(pgram: Periodogram, density):
    """Frequencies ``w_j`` and ratios for ``j = -m..m``, ``j != 0``."""
    n = pgram.n
    m = (n - 1) // 2
    j = np.arange(1, m + 1)
    w = 2.0 * np.pi * j / n
    if callable(density):
        f = np.asarray(density(w), dtype=float)
    else:
        density = np.asarray(density, dtype=float)
        if density.shape != (n,):
            raise ValueError(f"density must be given on the {n} Fourier frequencies")
        f = density[1:m + 1]
    if np.any(~np.isfinite(f)) or np.any(f <= 0):
        raise ValueError("fitted density must be finite and positive")
    r = pgram.ordinates[1:m + 1] / f
    return np.concatenate([-w[::-1], w]), np.concatenate([r[::-1], r])


def _check_bandwidth(n: int, h: float):
    if not (0 < h <= 1):
        raise ValueError("bandwidth must lie in (0, 1]")
    if n * h < 5:
        raise ValueError(f"bandwidth {h} too small for n={n}: fewer than 5 Fourier frequencies per window")


def _smooth(omega, wj, values, n, h, chunk=1024):
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.empty((len(omega),) + values.shape[1:])
    for lo in range(0, len(omega), chunk):
        W = epanechnikov((omega[lo:lo + chunk, None] - wj[None, :]) / h)
        out[lo:lo + chunk] = W @ values
    return out / (n * h)


def smoothed_ratio(pgram: Periodogram, density, h: float, omega):
    """Kernel smoother ``q(w) = (nh)^-1 sum_j K((w - w_j)/h) I(w_j) / f(w_j)``."""
    wj, r = _ratios(pgram, density)
    return _smooth(omega, wj, r, pgram.n, h)


def smoothing_mass(n: int, h: float, omega):
    """``s_h(w) = (nh)^-1 sum_j K((w - w_j)/h)``, the smoother applied to ones."""
    m = (n - 1) // 2
    w = 2.0 * np.pi * np.arange(1, m + 1) / n
    wj = np.concatenate([-w[::-1], w])
    return _smooth(omega, wj, np.ones_like(wj), n, h)


def _grid(n: int, h: float):
    # Simpson on [0, pi]; spacing below both the frequency spacing and h/20
    N = int(np.ceil(max(n, 20.0 * np.pi / h)))
    N += N % 2
    x = np.linspace(0.0, np.pi, N + 1)
    w = np.full(N + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return x, w * (np.pi / N) / 3.0


def _statistic_from_ratios(wj, r, n, h):
    x, qw = _grid(n, h)
    centred = _smooth(x, wj, r - 1.0, n, h)
    # integrand is even in omega
    return float(n * np.sqrt(h) * 2.0 * np.sum(qw * centred**2))


def gof_statistic(pgram: Periodogram, density, h: float = 0.1) -> GofReport:
    """Test statistic with its asymptotic p-value ``1 - Phi((S - mu_h) / tau)``."""
    _check_bandwidth(pgram.n, h)
    wj, r = _ratios(pgram, density)
    S = _statistic_from_ratios(wj, r, pgram.n, h)
    mh = mu_h(h)
    p = float(stats.norm.sf((S - mh) / TAU))
    return GofReport(S, mh, TAU, p, h, pgram.n, q2_diagnostic(pgram, density, h))


def q2_diagnostic(pgram: Periodogram, density, h: float = 0.1) -> np.ndarray:
    """``Q^2(w_j) = nh (q(w_j) - s_h(w_j))^2 / ((1/2pi) int K^2)`` on ``w_j`` in ``[0, pi]``.

    Returns an ``(m + 1, 2)`` array of ``(w_j, Q^2)``; compare with :data:`CHI2_95`.
    """
    _check_bandwidth(pgram.n, h)
    n = pgram.n
    m = (n - 1) // 2
    wj, r = _ratios(pgram, density)
    omega = 2.0 * np.pi * np.arange(0, m + 1) / n
    diff = _smooth(omega, wj, r - 1.0, n, h)
    q2 = n * h * diff**2 / (KERNEL_L2 / (2.0 * np.pi))
    return np.column_stack([omega, q2])


def gof_bootstrap(pgram: Periodogram, fit: WhittleFit, h: float = 0.1, B: int = 200,
                  rng: np.random.Generator | int | None = None, statistic: float | None = None,
                  config: SpectralConfig = SpectralConfig()) -> dict:
    """Frequency-domain bootstrap p-value with refitting.

    Replicate ordinates are ``f(w_j) E_j`` with i.i.d. standard exponential
    ``E_j``; each replicate is refitted from the original estimate and its
    statistic recomputed. ``p = (1 + #{S*_b >= S}) / (B + 1)``. The p-value
    is reported as ``None`` when more than 20% of the refits fail.
    """
    if B < 100:
        raise ValueError("use at least 100 bootstrap replicates")
    _check_bandwidth(pgram.n, h)
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    f_hat = fitted_density(pgram, fit, config)
    if statistic is None:
        statistic = gof_statistic(pgram, f_hat, h).statistic
    n = pgram.n
    half = n // 2
    sym = np.r_[0, np.arange(1, half + 1), np.arange(n - half - 1, 0, -1)][:n]
    fold_cfg = SpectralConfig(aliasing_terms=fit.extra.get("aliasing_terms"),
                              tail_correction=config.tail_correction)
    boot, failures = [], 0
    for _ in range(B):
        e = rng.standard_exponential(half + 1)
        ordinates = f_hat * e[sym]
        ordinates[0] = 0.0
        star = Periodogram(n, ordinates, True)
        try:
            refit = fit_periodogram(star, fit.delta, fit.family, fit.estimate, config=fold_cfg,
                                    compute_fisher=False)
        except ValueError:
            failures += 1
            continue
        if not refit.converged:
            failures += 1
            continue
        f_star = fitted_density(star, refit, fold_cfg)
        wj, r = _ratios(star, f_star)
        boot.append(_statistic_from_ratios(wj, r, n, h))
    boot = np.array(boot)
    valid = failures <= 0.2 * B
    p = float((1 + np.sum(boot >= statistic)) / (len(boot) + 1)) if valid else None
    return {"pvalue": p, "statistics": boot, "failures": failures, "B": B}


def gof_test(pgram: Periodogram, fit: WhittleFit, h: float = 0.1, B: int = 0,
             rng: np.random.Generator | int | None = None,
             config: SpectralConfig = SpectralConfig()) -> GofReport:
    """Asymptotic test for a fitted model, plus the bootstrap p-value if ``B > 0``."""
    f_hat = fitted_density(pgram, fit, config)
    report = gof_statistic(pgram, f_hat, h)
    if B:
        res = gof_bootstrap(pgram, fit, h, B, rng, report.statistic, config)
        report.bootstrap_pvalue = res["pvalue"]
        report.bootstrap_replicates = B
        report.bootstrap_failures = res["failures"]
    return report
