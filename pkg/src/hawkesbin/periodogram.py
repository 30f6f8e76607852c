"""Raw periodogram at the Fourier frequencies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simulation import BinCountSeries

__all__ = ["Periodogram", "compute_periodogram", "fourier_frequencies"]


def fourier_frequencies(n: int) -> np.ndarray:
    """``2 pi j / n`` for ``j = 0..n-1``."""
    return 2.0 * np.pi * np.arange(n) / n


@dataclass
class Periodogram:
    """Ordinates ``I_n(omega_j) = |sum_k X_k exp(-i k omega_j)|^2 / (2 pi n)``.

    The ``j = 0`` ordinate is kept; it is zero when the mean was removed.
    """

    n: int
    ordinates: np.ndarray
    mean_removed: bool = True

    @property
    def frequencies(self) -> np.ndarray:
        return fourier_frequencies(self.n)

    @property
    def half(self) -> slice:
        """Indices ``j = 1..floor(n/2)``, which determine all non-zero ordinates."""
        return slice(1, self.n // 2 + 1)


def compute_periodogram(series, remove_mean: bool = True) -> Periodogram:
    """FFT periodogram of a count series (``BinCountSeries`` or array)."""
    x = np.asarray(series.counts if isinstance(series, BinCountSeries) else series, dtype=float)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    n = len(x)
    if n < 2:
        raise ValueError("periodogram needs at least 2 observations")
    if remove_mean:
        x = x - x.mean()
    dft = np.fft.fft(x)
    ordinates = (dft.real**2 + dft.imag**2) / (2.0 * np.pi * n)
    if remove_mean:
        ordinates[0] = 0.0
    return Periodogram(n, ordinates, remove_mean)
