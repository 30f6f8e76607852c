"""Hawkes processes observed through bin counts: simulation, spectral
densities with aliasing, Whittle and maximum-likelihood estimation, and a
spectral goodness-of-fit test."""

from .experiments import MseTable, StudyConfig, run_study
from .gof import GofReport, gof_bootstrap, gof_statistic, gof_test, q2_diagnostic, smoothed_ratio
from .io import load_counts
from .kernels import Exponential, Gaussian, PowerLaw, parse_kernel
from .mle import exp_loglik, loglik, mle_fit
from .params import ModelFamily
from .periodogram import Periodogram, compute_periodogram, fourier_frequencies
from .simulation import (BinCountSeries, HawkesModel, PiecewiseConstantRate, PointRealization,
                         bin_counts, same_bin_probability, simulate, simulate_clusters)
from .spectral import (SpectralConfig, bartlett_density, binned_spectral_continuous,
                       binned_spectral_density, theoretical_autocovariance)
from .whittle import WhittleFit, fisher_information, fit, parametric_bootstrap, whittle_objective

__all__ = [
    "BinCountSeries", "Exponential", "Gaussian", "GofReport", "HawkesModel", "ModelFamily",
    "MseTable", "Periodogram", "PiecewiseConstantRate", "PointRealization", "PowerLaw",
    "SpectralConfig", "StudyConfig", "WhittleFit", "bartlett_density", "bin_counts",
    "binned_spectral_continuous", "binned_spectral_density", "compute_periodogram",
    "exp_loglik", "fisher_information", "fit", "fourier_frequencies", "gof_bootstrap",
    "gof_statistic", "gof_test", "load_counts", "loglik", "mle_fit", "parametric_bootstrap",
    "parse_kernel", "q2_diagnostic", "run_study", "same_bin_probability", "simulate",
    "simulate_clusters", "smoothed_ratio", "theoretical_autocovariance", "whittle_objective",
]
