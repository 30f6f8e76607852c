"""Continuous-time maximum likelihood on fully observed event times.

Baseline for the bin-count estimator. The likelihood conditions on no events
before the start of the window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .optim import minimize_box
from .params import BoxTransform, ModelFamily
from .simulation import HawkesModel, PointRealization
from .whittle import WhittleFit, _start_grid

__all__ = ["LikelihoodValue", "exp_loglik", "loglik", "mle_fit", "observed_information"]


@dataclass
class LikelihoodValue:
    loglik: float
    intensities: np.ndarray


def _window(realization: PointRealization):
    t = np.asarray(realization.times, dtype=float) - realization.start
    return t, realization.T - realization.start


def exp_loglik(realization: PointRealization, eta: float, mu: float, beta: float) -> LikelihoodValue:
    """Log-likelihood for the exponential kernel by the O(p) recursion.

    ``A_1 = 0``, ``A_i = exp(-beta (t_i - t_{i-1})) (1 + A_{i-1})`` and
    ``lambda(t_i) = eta + mu beta A_i``.
    """
    t, T = _window(realization)
    if eta <= 0 or beta <= 0 or mu < 0:
        raise ValueError("invalid parameters")
    lam = np.empty(len(t))
    A = 0.0
    prev = None
    exp = math.exp
    for i, ti in enumerate(t.tolist()):
        if prev is not None:
            A = exp(-beta * (ti - prev)) * (1.0 + A)
        lam[i] = eta + mu * beta * A
        prev = ti
    comp = eta * T + mu * float(np.sum(-np.expm1(-beta * (T - t))))
    ll = float(np.sum(np.log(lam))) - comp
    if not np.isfinite(ll):
        raise ValueError("non-finite log-likelihood")
    return LikelihoodValue(ll, lam)


def loglik(realization: PointRealization, model: HawkesModel, chunk: int = 2048) -> LikelihoodValue:
    """Log-likelihood for any causal kernel by the direct O(p^2) intensity sum."""
    if not model.kernel.causal:
        raise ValueError("conditional intensity is not available for non-causal kernels")
    t, T = _window(realization)
    eta, mu, k = float(model.eta), model.mu, model.kernel
    lam = np.full(len(t), eta)
    for lo in range(0, len(t), chunk):
        ti = t[lo:lo + chunk]
        hi = lo + len(ti)
        d = ti[:, None] - t[None, :hi]
        mask = np.arange(hi)[None, :] < np.arange(lo, hi)[:, None]
        lam[lo:hi] += mu * np.sum(np.where(mask, k.density(np.where(mask, d, 0.0)), 0.0), axis=1)
    comp = eta * T + mu * float(np.sum(k.cdf(T - t)))
    ll = float(np.sum(np.log(lam))) - comp
    if not np.isfinite(ll):
        raise ValueError("non-finite log-likelihood")
    return LikelihoodValue(ll, lam)


def _loglik_fn(realization, family: ModelFamily):
    if family.kernel == "exp":
        return lambda theta: exp_loglik(realization, *theta).loglik
    if family.kernel == "powerlaw":
        return lambda theta: loglik(realization, family.model(theta)).loglik
    raise ValueError("maximum likelihood is available for the exp and powerlaw families only")


def observed_information(ll, theta, rel_step: float = 1e-4) -> np.ndarray:
    """Negative Hessian of ``ll`` at ``theta`` by central differences."""
    theta = np.asarray(theta, dtype=float)
    p = len(theta)
    h = rel_step * np.maximum(np.abs(theta), 1e-3)
    H = np.empty((p, p))
    f0 = ll(theta)
    for i in range(p):
        for j in range(i, p):
            if i == j:
                tp, tm = theta.copy(), theta.copy()
                tp[i] += h[i]
                tm[i] -= h[i]
                H[i, i] = (ll(tp) - 2 * f0 + ll(tm)) / h[i] ** 2
            else:
                vals = []
                for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                    tt = theta.copy()
                    tt[i] += si * h[i]
                    tt[j] += sj * h[j]
                    vals.append(ll(tt))
                H[i, j] = H[j, i] = (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * h[i] * h[j])
    return -H


def mle_fit(realization: PointRealization, family: ModelFamily | str, init=None,
            bounds: dict | None = None, coordinates: str = "transformed",
            maxiter: int = 500) -> WhittleFit:
    """Maximum-likelihood estimate, same result type as the Whittle fit.

    For the power-law family the scale ``a`` must be fixed (``"powerlaw:a=1.5"``).
    """
    if isinstance(family, str):
        family = ModelFamily.parse(family)
    if family.kernel == "powerlaw" and "a" not in family.fixed:
        raise ValueError("power-law MLE needs the scale a fixed, e.g. 'powerlaw:a=1.5'")
    t, T = _window(realization)
    p = len(t)
    if p == 0:
        raise ValueError("no events to fit")
    ll = _loglik_fn(realization, family)
    lower, upper = family.bounds(bounds)
    transform = BoxTransform(lower, upper)
    if init is None:
        rate = p / T
        kernel0 = {"beta": rate if rate > 0 else 1.0, "gamma": 2.0}
        init = [0.5 * rate, 0.5] + [kernel0[k] for k in family.free_kernel_names]
    elif isinstance(init, dict):
        init = [init[k] for k in family.names]
    theta0 = np.asarray(init, dtype=float)

    def objective(theta):
        return -ll(theta) / p

    starts = [theta0] + _start_grid(theta0, family, lower, upper)
    results = []
    for s in starts:
        results.append(minimize_box(objective, s, transform, coordinates, maxiter=maxiter))
        if results[-1].converged:
            break
    pool = [r for r in results if r.converged] or results
    best = min(pool, key=lambda r: r.value)
    cov = None
    cond = float("nan")
    if best.converged:
        try:
            info = observed_information(ll, best.theta)
            cond = float(np.linalg.cond(info))
            cov = np.linalg.inv(info)
        except (np.linalg.LinAlgError, ValueError):
            cov = None
    history = [-v * p for v in best.history]
    return WhittleFit(family, family.names, best.theta, -best.value * p, None, cov, p, float("nan"),
                      best.n_iter, best.grad_norm, best.converged, best.message, len(results),
                      method="mle", c4_omitted=False, fisher_condition=cond,
                      extra={"T": T}, history=history)
