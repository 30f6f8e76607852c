"""Spectral densities of Hawkes bin-count sequences.

Conventions
-----------
Frequencies of the bin-count sequence are in radians per bin, ``omega`` in
``[-pi, pi]``. :func:`binned_spectral_density` returns the density in the
normalisation where the periodogram is asymptotically unbiased::

    r(u) = int_{-pi}^{pi} f(omega) exp(i omega u) d omega,

so i.i.d. counts with variance ``s2`` have ``f = s2 / (2 pi)``.

The aliasing fold is evaluated as

    f_d(w) = m D [1 + sum_k sinc^2((w + 2k pi)/2) g((w + 2k pi)/D)],
    g(x)   = |1 - mu h~(x)|^-2 - 1,

which uses ``sum_k sinc^2((w + 2k pi)/2) = 1``. Since ``g(x) = O(x^-2)`` for
the kernels shipped here, the truncated sum converges like ``K^-3`` and the
remainder is estimated from the outermost terms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simulation import HawkesModel, mean_intensity

__all__ = [
    "SpectralConfig",
    "bartlett_density",
    "binned_spectral_continuous",
    "binned_spectral_density",
    "aliasing_terms_needed",
    "FoldEvaluator",
    "theoretical_autocovariance",
]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SpectralConfig:
    """Controls the aliasing fold.

    ``aliasing_terms=None`` picks K from the tail bound so that the neglected
    remainder stays below ``tail_tolerance``. ``max_terms`` is a hard cap.
    """

    aliasing_terms: int | None = None
    tail_tolerance: float = 1e-8
    max_terms: int = 20000
    tail_correction: bool = True

    def __post_init__(self):
        if self.aliasing_terms is not None and self.aliasing_terms < 1:
            raise ValueError("aliasing_terms must be >= 1")
        if self.tail_tolerance <= 0:
            raise ValueError("tail_tolerance must be > 0")


def _stationary(model: HawkesModel):
    if not model.stationary:
        raise ValueError("spectral densities need constant immigration")


def bartlett_density(model: HawkesModel, omega):
    """Bartlett spectrum density ``(m / 2 pi) |1 - mu h~(omega)|^-2`` of the point process."""
    _stationary(model)
    m = mean_intensity(model)
    ht = model.mu * model.kernel.fourier(omega)
    return m / TWO_PI / np.abs(1.0 - ht) ** 2


def _sinc2_half(w):
    # sinc^2(w/2) with sinc(x) = sin(x)/x
    return np.sinc(np.asarray(w, dtype=float) / TWO_PI) ** 2


def binned_spectral_continuous(model: HawkesModel, delta: float, omega):
    """Spectral density of the continuous-time bin-count process.

    ``m delta sinc^2(omega/2) |1 - mu h~(omega/delta)|^-2``, Fourier pair
    without the 1/(2 pi) factor on the density side.
    """
    _stationary(model)
    m = mean_intensity(model)
    omega = np.asarray(omega, dtype=float)
    ht = model.mu * model.kernel.fourier(omega / delta)
    return m * delta * _sinc2_half(omega) / np.abs(1.0 - ht) ** 2


def _g(model: HawkesModel, x):
    return 1.0 / np.abs(1.0 - model.mu * model.kernel.fourier(x)) ** 2 - 1.0


def _tail_constant(model: HawkesModel, delta: float) -> float:
    """Envelope constant A with |g(x)| <= A / x^2 on x >= pi/delta (probed)."""
    if model.mu == 0:
        return 0.0
    x = np.pi / delta * np.geomspace(1.0, 2.0**16, 49)
    return float(np.max(np.abs(_g(model, x)) * x * x))


def aliasing_terms_needed(model: HawkesModel, delta: float, config: SpectralConfig = SpectralConfig()) -> int:
    """Smallest K whose neglected fold remainder is below the tolerance.

    Remainder bound: m D * 8 A D^2 / (6 pi^4 (2K - 1)^3).
    """
    if config.aliasing_terms is not None:
        return config.aliasing_terms
    m = mean_intensity(model)
    A = _tail_constant(model, delta)
    if A == 0.0:
        return 1
    c = m * delta * 8.0 * A * delta**2 / (6.0 * np.pi**4)
    K = int(np.ceil(0.5 * ((c / config.tail_tolerance) ** (1.0 / 3.0) + 1.0)))
    K = max(K, 1)
    if K > config.max_terms:
        raise ValueError(
            f"aliasing fold needs K={K} terms for tolerance {config.tail_tolerance:g}, "
            f"above the cap {config.max_terms}; raise max_terms or tail_tolerance")
    return K


class FoldEvaluator:
    """Folded density on a fixed frequency grid for a fixed number of terms.

    Precomputes the shifted frequencies so repeated evaluation for different
    models (as in an optimiser) only re-evaluates the kernel transform.
    """

    def __init__(self, omega, delta: float, K: int, tail_correction: bool = True):
        self.omega = np.asarray(omega, dtype=float)
        self.delta = float(delta)
        self.K = int(K)
        self.tail_correction = tail_correction
        w = np.abs(self.omega.ravel())
        k = np.arange(-self.K, self.K + 1)
        shifted = w[:, None] + TWO_PI * k[None, :]
        self._x = shifted / self.delta
        self._weights = _sinc2_half(shifted)
        s2 = np.sin(w / 2.0) ** 2
        hi = (2 * self.K + 1) * np.pi
        # sum_{k>K} (w + 2k pi)^-4 and sum_{k<-K} by the integral approximation
        self._tail_pos = 4.0 * s2 * self.delta**2 / (6.0 * np.pi * (hi + w) ** 3)
        self._tail_neg = 4.0 * s2 * self.delta**2 / (6.0 * np.pi * (hi - w) ** 3)

    def fold(self, model: HawkesModel) -> np.ndarray:
        """``f_d`` (no 1/(2 pi) factor) on the grid."""
        m = mean_intensity(model)
        if model.mu == 0:
            return np.full(self.omega.shape, m * self.delta)
        g = _g(model, self._x)
        total = 1.0 + np.sum(self._weights * g, axis=1)
        if self.tail_correction:
            x_pos, x_neg = self._x[:, -1], self._x[:, 0]
            total += self._tail_pos * g[:, -1] * x_pos**2 + self._tail_neg * g[:, 0] * x_neg**2
        return (m * self.delta * total).reshape(self.omega.shape)

    def __call__(self, model: HawkesModel) -> np.ndarray:
        return self.fold(model) / TWO_PI


def binned_spectral_density(model: HawkesModel, delta: float, omega,
                            config: SpectralConfig = SpectralConfig()):
    """Folded spectral density of the bin-count sequence, ``f_d / (2 pi)``.

    Accepts any real ``omega``; the result is 2 pi periodic and even.
    """
    _stationary(model)
    omega = np.asarray(omega, dtype=float)
    wrapped = np.mod(omega + np.pi, TWO_PI) - np.pi
    K = aliasing_terms_needed(model, delta, config)
    return FoldEvaluator(wrapped, delta, K, config.tail_correction)(model)


# composite Gauss-Legendre on [0, pi], panels refined geometrically towards 0
_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


def _panel_nodes(n_refine: int, n_uniform: int):
    edges = np.concatenate([[0.0], np.pi * 2.0 ** -np.arange(n_refine, 0, -1),
                            np.linspace(np.pi / 2, np.pi, n_uniform + 1)])
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    nodes = (lo + half)[:, None] + half[:, None] * _GL_X[None, :]
    weights = half[:, None] * _GL_W[None, :]
    return nodes.ravel(), weights.ravel()


def theoretical_autocovariance(model: HawkesModel, delta: float, lags,
                               config: SpectralConfig = SpectralConfig(),
                               rtol: float = 1e-9):
    """Autocovariance of the bin-count sequence at integer ``lags``.

    ``r(u) = 2 int_0^pi f(omega) cos(omega u) d omega``, computed by composite
    Gauss-Legendre quadrature; the rule is refined once and the two results
    compared, raising ``ArithmeticError`` if they disagree beyond ``rtol``.
    """
    lags = np.atleast_1d(np.asarray(lags))
    if not np.all(lags == np.round(lags)):
        raise ValueError("lags must be integers")
    K = aliasing_terms_needed(model, delta, config)
    u = np.abs(lags).astype(float)
    results = []
    for n_refine, n_uniform in ((12, max(8, int(np.max(u)) // 4 + 8)),
                                (16, max(16, int(np.max(u)) // 2 + 16))):
        x, w = _panel_nodes(n_refine, n_uniform)
        f = FoldEvaluator(x, delta, K, config.tail_correction)(model)
        results.append(2.0 * (np.cos(np.outer(u, x)) * f) @ w)
    coarse, fine = results
    scale = np.max(np.abs(fine))
    if np.any(np.abs(fine - coarse) > rtol * scale + 1e-14):
        raise ArithmeticError(
            f"autocovariance quadrature did not converge: max diff {np.max(np.abs(fine - coarse)):.3g}")
    return fine
