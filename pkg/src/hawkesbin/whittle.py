"""Whittle estimation of Hawkes parameters from bin counts.

The objective is the Riemann-sum form of the log-spectral likelihood on the
Fourier frequencies, with the zero frequency left out::

    L_n(theta) = (1 / 2n) sum_{j=1}^{n-1} [log f(w_j) + I_n(w_j) / f(w_j)].
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .optim import minimize_box
from .params import BoxTransform, ModelFamily
from .periodogram import Periodogram, compute_periodogram
from .simulation import (DEFAULT_BURNIN, BinCountSeries, HawkesModel, bin_counts,
                         replicate_rng, simulate)
from .spectral import FoldEvaluator, SpectralConfig, _panel_nodes, aliasing_terms_needed

__all__ = [
    "WhittleFit",
    "WhittleProblem",
    "whittle_objective",
    "fit",
    "fit_periodogram",
    "default_init",
    "fisher_information",
    "fisher_matrix",
    "parametric_bootstrap",
    "MIN_SERIES_LENGTH",
]

MIN_SERIES_LENGTH = 32


class WhittleProblem:
    """Whittle objective for one periodogram, with the fold grid precomputed.

    Only the ordinates ``j = 1..floor(n/2)`` are evaluated; the others follow
    by symmetry and enter through ``weights``.
    """

    def __init__(self, pgram: Periodogram, delta: float, K: int, tail_correction: bool = True):
        n = pgram.n
        self.pgram = pgram
        self.n = n
        self.delta = float(delta)
        self.K = K
        j = np.arange(1, n // 2 + 1)
        self.omega = 2.0 * np.pi * j / n
        self.I = pgram.ordinates[1:n // 2 + 1]
        self.weights = np.where(2 * j == n, 1.0, 2.0)
        self.evaluator = FoldEvaluator(self.omega, delta, K, tail_correction)

    def density(self, model: HawkesModel) -> np.ndarray:
        return self.evaluator(model)

    def __call__(self, model: HawkesModel) -> float:
        f = self.density(model)
        if not np.all(np.isfinite(f)) or np.any(f <= 0):
            raise ValueError("spectral density not finite and positive at these parameters")
        return float(np.sum(self.weights * (np.log(f) + self.I / f)) / (2.0 * self.n))


def whittle_objective(model: HawkesModel, pgram: Periodogram, delta: float,
                      config: SpectralConfig = SpectralConfig()) -> float:
    """Discretised Whittle objective of ``model`` for ``pgram`` (bins of width ``delta``)."""
    K = aliasing_terms_needed(model, delta, config)
    return WhittleProblem(pgram, delta, K, config.tail_correction)(model)


@dataclass
class WhittleFit:
    """Estimates with asymptotic covariance ``Gamma^-1 / n``.

    ``c4_omitted`` flags that the fourth-cumulant part of the sandwich
    covariance is not included; :func:`parametric_bootstrap` gives an
    alternative.
    """

    family: ModelFamily
    names: tuple
    estimate: np.ndarray
    objective: float
    fisher: np.ndarray | None
    covariance: np.ndarray | None
    n: int
    delta: float
    n_iter: int
    grad_norm: float
    converged: bool
    message: str = ""
    n_starts: int = 1
    method: str = "whittle"
    c4_omitted: bool = True
    fisher_condition: float = float("nan")
    extra: dict = field(default_factory=dict)
    history: list = field(default_factory=list, repr=False)

    @property
    def params(self) -> dict[str, float]:
        return dict(zip(self.names, map(float, self.estimate)))

    @property
    def std_errors(self) -> np.ndarray:
        if self.covariance is None:
            return np.full(len(self.names), np.nan)
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))

    @property
    def model(self) -> HawkesModel:
        return self.family.model(self.estimate)

    def near_bounds(self, tol: float = 1e-3) -> list[str]:
        """Parameters within ``tol * max(1, |bound|)`` of a finite default or user bound."""
        lower, upper = self.family.bounds(self.extra.get("bounds"))
        out = []
        for name, x, lo, hi in zip(self.names, self.estimate, lower, upper):
            if any(np.isfinite(b) and abs(x - b) <= tol * max(1.0, abs(b)) for b in (lo, hi)):
                out.append(name)
        return out

    def to_dict(self) -> dict:
        cov = None if self.covariance is None else self.covariance.tolist()
        return {
            "method": self.method,
            "family": self.family.label(),
            "parameters": self.params,
            "std_errors": dict(zip(self.names, map(_jsonable, self.std_errors))),
            "covariance": None if cov is None else [[_jsonable(v) for v in row] for row in cov],
            "covariance_note": ("inverse Fisher matrix / n; fourth-cumulant term omitted"
                                if self.c4_omitted else "observed information"),
            "objective": _jsonable(self.objective),
            "n": self.n,
            "delta": _jsonable(self.delta),
            "diagnostics": {
                "converged": self.converged,
                "iterations": self.n_iter,
                "gradient_norm": self.grad_norm,
                "starts": self.n_starts,
                "message": self.message,
                "fisher_condition": _jsonable(self.fisher_condition),
                "near_bounds": self.near_bounds(),
            },
            **{k: v for k, v in self.extra.items() if k != "bounds"},
        }


def _jsonable(v):
    v = float(v)
    return v if np.isfinite(v) else None


def _decay_time(counts: np.ndarray, delta: float, max_lag: int = 50) -> float:
    """Lag (in time units) over which the sample ACF falls by a factor e from lag 1."""
    x = counts - counts.mean()
    var = np.dot(x, x)
    if var == 0 or len(x) < 4:
        return delta
    L = min(max_lag, len(x) // 4)
    acf = np.array([np.dot(x[:-k], x[k:]) / var for k in range(1, L + 1)])
    if acf[0] <= 0.05:
        return delta
    below = np.flatnonzero(acf < acf[0] / np.e)
    lags = below[0] if len(below) else L - 1
    return delta * max(1, lags)


def default_init(series: BinCountSeries, family: ModelFamily, mu0: float = 0.5) -> np.ndarray:
    """Start: mu = 0.5, eta from the sample mean, kernel scale from the ACF decay time."""
    counts = np.asarray(series.counts, dtype=float)
    delta = series.delta
    eta0 = max(counts.mean(), 1e-3) / delta * (1.0 - mu0)
    scale = (1.0 - mu0) * _decay_time(counts, delta)
    guesses = {"beta": 1.0 / scale, "sigma": max(scale / 2.0, delta / 4.0), "nu": scale}
    if family.kernel == "powerlaw":
        a = family.fixed.get("a", 1.5 * scale)
        guesses["a"] = a
        guesses["gamma"] = 1.0 + a / scale
    theta = [eta0, mu0] + [guesses[k] for k in family.free_kernel_names]
    return np.array(theta, dtype=float)


def _start_grid(theta0: np.ndarray, family: ModelFamily, lower, upper) -> list[np.ndarray]:
    axes = [[theta0[0]], [0.2, 0.5, 0.8]]
    for i, k in enumerate(family.free_kernel_names, start=2):
        if k == "nu":
            axes.append([theta0[i] * 0.5, theta0[i], theta0[i] * 2.0 + 1.0])
        else:
            axes.append([theta0[i] / 3.0, theta0[i], theta0[i] * 3.0])
    starts = []
    for combo in itertools.product(*axes):
        t = np.array(combo, dtype=float)
        # keep eta consistent with the mean level for each mu
        t[0] = theta0[0] / (1.0 - theta0[1]) * (1.0 - t[1])
        pad_lo = np.where(np.isfinite(lower), 1e-6 * np.maximum(1, np.abs(lower)), 0.0)
        pad_hi = np.where(np.isfinite(upper), 1e-6 * np.maximum(1, np.abs(upper)), 0.0)
        t = np.clip(t, lower + pad_lo, upper - pad_hi)
        if not any(np.allclose(t, s) for s in starts) and not np.allclose(t, theta0):
            starts.append(t)
    return starts


def fit_periodogram(pgram: Periodogram, delta: float, family: ModelFamily, init,
                    bounds: dict | None = None, config: SpectralConfig = SpectralConfig(),
                    coordinates: str = "transformed", multistart: bool = False,
                    maxiter: int = 500, compute_fisher: bool = True) -> WhittleFit:
    """Minimise the Whittle objective for a given periodogram."""
    lower, upper = family.bounds(bounds)
    transform = BoxTransform(lower, upper)
    theta0 = np.asarray(init, dtype=float)
    if not transform.inside(theta0):
        raise ValueError(f"initial values {dict(zip(family.names, theta0))} outside bounds")
    starts = [theta0] + _start_grid(theta0, family, lower, upper)
    K = aliasing_terms_needed(family.model(theta0), delta, config)
    problem = WhittleProblem(pgram, delta, K, config.tail_correction)

    def objective(theta):
        return problem(family.model(theta))

    results = []
    for i, s in enumerate(starts):
        if i and not multistart and any(r.converged for r in results):
            break
        results.append(minimize_box(objective, s, transform, coordinates, maxiter=maxiter))
    # lowest objective among converged runs; ties keep the earliest start
    pool = [r for r in results if r.converged] or results
    best = min(pool, key=lambda r: r.value)
    fisher = cov = None
    cond = float("nan")
    if compute_fisher and best.converged:
        try:
            fisher = fisher_information(family, best.theta, delta,
                                        SpectralConfig(aliasing_terms=K, tail_correction=config.tail_correction))
            cond = float(np.linalg.cond(fisher))
            cov = np.linalg.inv(fisher) / pgram.n
        except (ValueError, np.linalg.LinAlgError):
            fisher = cov = None
    return WhittleFit(family, family.names, best.theta, best.value, fisher, cov, pgram.n, float(delta),
                      best.n_iter, best.grad_norm, best.converged, best.message, len(results),
                      fisher_condition=cond, extra={"aliasing_terms": K, "bounds": bounds})


def fit(series: BinCountSeries, family: ModelFamily | str, init=None, bounds: dict | None = None,
        config: SpectralConfig = SpectralConfig(), coordinates: str = "transformed",
        multistart: bool = False, maxiter: int = 500) -> WhittleFit:
    """Whittle estimate of ``(eta, mu, kernel parameters)`` from a count series.

    Starts from :func:`default_init` unless ``init`` is given. If the first
    start fails to converge, a small grid of further starts is tried
    (all of them with ``multistart=True``). A run that never converges is
    returned with ``converged=False`` rather than raising.
    """
    if isinstance(family, str):
        family = ModelFamily.parse(family)
    counts = np.asarray(series.counts)
    if len(counts) < MIN_SERIES_LENGTH:
        raise ValueError(f"series too short for Whittle estimation (n={len(counts)} < {MIN_SERIES_LENGTH})")
    if np.all(counts == 0):
        raise ValueError("all-zero series carries no information")
    if np.any(counts < 0):
        raise ValueError("counts must be non-negative")
    if init is None:
        init = default_init(series, family)
    elif isinstance(init, dict):
        init = np.array([init[k] for k in family.names], dtype=float)
    pgram = compute_periodogram(series, remove_mean=True)
    return fit_periodogram(pgram, series.delta, family, init, bounds, config, coordinates,
                           multistart, maxiter)


def fisher_matrix(log_density, theta, omega=None, weights=None, rel_step: float = 1e-6,
                  lower=None, upper=None) -> np.ndarray:
    """``(1/4pi) int_{-pi}^{pi} d_k log f d_l log f`` for an even log-density.

    ``log_density(theta, omega)`` returns log f on ``omega`` in ``[0, pi]``.
    Derivatives by central differences, one-sided where a step would leave
    the open box ``(lower, upper)``; the integral by composite Gauss-Legendre
    refined near zero (``omega``/``weights`` override it).
    """
    theta = np.asarray(theta, dtype=float)
    p = len(theta)
    lower = np.full(p, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(p, np.inf) if upper is None else np.asarray(upper, dtype=float)
    if omega is None:
        omega, weights = _panel_nodes(14, 16)
    grads = []
    f0 = None
    for i in range(p):
        h = rel_step * (abs(theta[i]) if theta[i] != 0 else 1.0)
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] -= h
        if tm[i] <= lower[i] or tp[i] >= upper[i]:
            f0 = log_density(theta, omega) if f0 is None else f0
            if tm[i] <= lower[i]:
                grads.append((log_density(tp, omega) - f0) / h)
            else:
                grads.append((f0 - log_density(tm, omega)) / h)
            continue
        grads.append((log_density(tp, omega) - log_density(tm, omega)) / (2.0 * h))
    G = np.array(grads)
    # even integrand: (1/4pi) * 2 * int_0^pi
    M = (G * weights) @ G.T / (2.0 * np.pi)
    return 0.5 * (M + M.T)


def fisher_information(family: ModelFamily, theta, delta: float,
                       config: SpectralConfig = SpectralConfig()) -> np.ndarray:
    """Fisher-type matrix of the Whittle objective at ``theta``.

    Raises ``np.linalg.LinAlgError`` with the condition number if singular.
    """
    theta = np.asarray(theta, dtype=float)
    K = aliasing_terms_needed(family.model(theta), delta, config)
    omega, weights = _panel_nodes(14, 16)
    ev = FoldEvaluator(omega, delta, K, config.tail_correction)
    lower, upper = family.bounds()
    M = fisher_matrix(lambda t, w: np.log(ev(family.model(t))), theta, omega, weights,
                      lower=lower, upper=upper)
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e14:
        raise np.linalg.LinAlgError(f"Fisher matrix is singular (condition number {cond:.3g})")
    return M


def parametric_bootstrap(fit_result: WhittleFit, B: int = 100, seed: int = 0,
                         burnin: float = DEFAULT_BURNIN,
                         config: SpectralConfig = SpectralConfig()) -> dict:
    """Covariance of the estimator by refitting ``B`` series simulated from the fit.

    Each replicate is simulated on ``[0, n delta]``, binned, and refitted
    starting from the original estimate.
    """
    model = fit_result.model
    T = fit_result.n * fit_result.delta
    estimates, failures = [], 0
    for b in range(B):
        rng = replicate_rng(seed, b)
        series = bin_counts(simulate(model, T, burnin, rng), fit_result.delta)
        try:
            r = fit(series, fit_result.family, init=fit_result.estimate, config=config)
        except ValueError:
            failures += 1
            continue
        if r.converged:
            estimates.append(r.estimate)
        else:
            failures += 1
    est = np.array(estimates)
    cov = np.cov(est, rowvar=False) if len(est) > 1 else None
    return {"covariance": cov, "estimates": est, "failures": failures, "B": B}
