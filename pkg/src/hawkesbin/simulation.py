"""Cluster simulation of linear Hawkes processes and bin counting."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .kernels import Exponential, ReproductionKernel

__all__ = [
    "PiecewiseConstantRate",
    "HawkesModel",
    "PointRealization",
    "BinCountSeries",
    "simulate",
    "simulate_clusters",
    "bin_counts",
    "thin",
    "mean_intensity",
    "same_bin_probability",
    "gw_moments",
    "GWMoments",
    "replicate_rng",
    "DEFAULT_BURNIN",
]

DEFAULT_BURNIN = 100.0


@dataclass(frozen=True)
class PiecewiseConstantRate:
    """Bounded immigration intensity, constant between breakpoints.

    ``values[i]`` applies on ``[breaks[i], breaks[i+1])``; the first value
    extends to -inf and the last to +inf. ``bound`` must dominate every value.
    """

    breaks: tuple[float, ...]
    values: tuple[float, ...]
    bound: float | None = None

    def __post_init__(self):
        if len(self.values) != len(self.breaks) + 1:
            raise ValueError("need len(values) == len(breaks) + 1")
        if any(np.diff(self.breaks) <= 0):
            raise ValueError("breaks must be strictly increasing")
        if any(v < 0 or not np.isfinite(v) for v in self.values):
            raise ValueError("immigration intensity must be finite and non-negative")
        if self.bound is None:
            raise ValueError("time-varying immigration needs a declared finite bound")
        if not np.isfinite(self.bound) or self.bound < max(self.values):
            raise ValueError("bound must be finite and dominate all values")

    def __call__(self, t):
        idx = np.searchsorted(np.asarray(self.breaks), np.asarray(t, dtype=float), side="right")
        return np.asarray(self.values)[idx]


@dataclass(frozen=True)
class HawkesModel:
    """Stationary (or bounded time-varying) linear Hawkes process.

    The reproduction function is ``mu * kernel.density``; ``mu`` is the mean
    number of direct offspring per event.
    """

    eta: float | PiecewiseConstantRate
    mu: float
    kernel: ReproductionKernel = field(default_factory=Exponential)

    def __post_init__(self):
        if not (0.0 <= self.mu < 1.0):
            raise ValueError(f"branching ratio mu must lie in [0, 1), got {self.mu!r}")
        if not isinstance(self.eta, PiecewiseConstantRate):
            if not (np.isfinite(self.eta) and self.eta > 0):
                raise ValueError(f"immigration intensity eta must be > 0, got {self.eta!r}")

    @property
    def stationary(self) -> bool:
        return not isinstance(self.eta, PiecewiseConstantRate)

    @property
    def eta_max(self) -> float:
        return self.eta.bound if not self.stationary else float(self.eta)


@dataclass
class PointRealization:
    times: np.ndarray
    T: float
    seed: int | None = None
    start: float = 0.0

    def __len__(self):
        return len(self.times)


@dataclass
class BinCountSeries:
    """Counts on consecutive bins ``(origin + k delta, origin + (k+1) delta]``."""

    counts: np.ndarray
    delta: float
    origin: float = 0.0
    discarded: int = 0

    def __post_init__(self):
        self.counts = np.asarray(self.counts)
        if self.delta <= 0:
            raise ValueError("bin width must be > 0")

    def __len__(self):
        return len(self.counts)

    @property
    def n(self) -> int:
        return len(self.counts)


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for replicate ``index`` of a study seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _immigrants(model: HawkesModel, lo: float, hi: float, rng) -> np.ndarray:
    rate = model.eta_max
    n = rng.poisson(rate * (hi - lo))
    t = np.sort(rng.uniform(lo, hi, size=n))
    if not model.stationary:
        keep = rng.random(n) * rate < model.eta(t)
        t = t[keep]
    return t


def _grow(roots: np.ndarray, mu: float, kernel: ReproductionKernel, rng,
          track: bool = False):
    """Breadth-first offspring generation from ``roots``.

    Returns all points (roots included). With ``track`` also returns the
    generation and the root index of each point.
    """
    times = [roots]
    gens = [np.zeros(len(roots), dtype=np.int64)] if track else None
    ids = [np.arange(len(roots))] if track else None
    parents = roots
    parent_ids = ids[0] if track else None
    g = 0
    while len(parents):
        g += 1
        n_child = rng.poisson(mu, size=len(parents))
        total = int(n_child.sum())
        if total == 0:
            break
        children = np.repeat(parents, n_child) + kernel.sample(rng, total)
        times.append(children)
        if track:
            parent_ids = np.repeat(parent_ids, n_child)
            ids.append(parent_ids)
            gens.append(np.full(total, g, dtype=np.int64))
        parents = children
    pts = np.concatenate(times)
    if track:
        return pts, np.concatenate(gens), np.concatenate(ids)
    return pts


def _make_simple(t: np.ndarray) -> np.ndarray:
    # exact duplicates are pushed up by one ulp so the process stays simple
    while len(t) > 1:
        dup = np.flatnonzero(np.diff(t) <= 0)
        if not len(dup):
            break
        t[dup + 1] = np.nextafter(t[dup], np.inf)
    return t


def simulate(model: HawkesModel, T: float, burnin: float = DEFAULT_BURNIN,
             rng: np.random.Generator | int | None = None) -> PointRealization:
    """Simulate ``model`` on ``[0, T]`` through its cluster representation.

    Immigrants are drawn on ``[-burnin, T]``; for non-causal kernels also on
    ``(T, T + burnin]`` since their offspring may land in the window.
    """
    if T <= 0:
        raise ValueError("T must be > 0")
    if burnin < 0:
        raise ValueError("burnin must be >= 0")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    hi = T if model.kernel.causal else T + burnin
    roots = _immigrants(model, -burnin, hi, rng)
    pts = _grow(roots, model.mu, model.kernel, rng)
    pts = np.sort(pts[(pts >= 0) & (pts <= T)], kind="stable")
    return PointRealization(_make_simple(pts), float(T), None if seed is None else int(seed))


def simulate_clusters(mu: float, kernel: ReproductionKernel, n_clusters: int,
                      rng: np.random.Generator, max_generation: int = 50) -> np.ndarray:
    """Generation sizes ``Z_k`` of ``n_clusters`` independent clusters rooted at 0.

    Returns an ``(n_clusters, max_generation + 1)`` integer array; column 0 is
    the immigrant. Generations beyond ``max_generation`` are dropped.
    """
    pts, gens, ids = _grow(np.zeros(n_clusters), mu, kernel, rng, track=True)
    keep = gens <= max_generation
    out = np.zeros((n_clusters, max_generation + 1), dtype=np.int64)
    np.add.at(out, (ids[keep], gens[keep]), 1)
    return out


def bin_counts(realization: PointRealization, delta: float,
               origin: float | None = None) -> BinCountSeries:
    """Count events in ``(origin + k delta, origin + (k+1) delta]``.

    The number of bins is ``floor((T - origin) / delta)``; events past the last
    full bin (or not after ``origin``) are dropped and reported in ``discarded``.
    """
    if delta <= 0:
        raise ValueError("bin width must be > 0")
    origin = realization.start if origin is None else origin
    n = int(np.floor((realization.T - origin) / delta + 1e-12))
    if n < 1:
        raise ValueError("window shorter than one bin")
    t = np.asarray(realization.times, dtype=float)
    k = np.ceil((t - origin) / delta).astype(np.int64) - 1
    ok = (k >= 0) & (k < n)
    counts = np.bincount(k[ok], minlength=n)
    return BinCountSeries(counts, float(delta), float(origin), int((~ok).sum()))


def thin(realization: PointRealization, p: float, rng) -> PointRealization:
    """Independent p-thinning: each event is kept with probability ``p``."""
    keep = rng.random(len(realization.times)) < p
    return PointRealization(realization.times[keep], realization.T, realization.seed, realization.start)


def mean_intensity(model: HawkesModel) -> float:
    """Stationary mean event rate ``eta / (1 - mu)``."""
    if not model.stationary:
        raise ValueError("mean intensity is defined for constant immigration only")
    return float(model.eta) / (1.0 - model.mu)


def same_bin_probability(beta: float, delta: float) -> float:
    """Probability that an offspring falls in its parent's bin (exponential kernel).

    Equals ``1 - (1 - exp(-beta delta)) / (beta delta)``.
    """
    if beta <= 0 or delta <= 0:
        raise ValueError("beta and delta must be > 0")
    x = beta * delta
    if x < 1e-8:
        return x / 2.0
    return float(1.0 + np.expm1(-x) / x)


class GWMoments(NamedTuple):
    mean: float
    var: float
    cov: float
    product: float


def gw_moments(mu: float, k: int, l: int | None = None) -> GWMoments:
    """Moments of generation sizes for Poisson(mu) offspring, ``Z_0 = 1``.

    ``mean`` and ``var`` refer to ``Z_k``; ``cov`` and ``product`` are
    ``Cov(Z_k, Z_l)`` and ``E[Z_k Z_l]`` for ``k <= l`` (``l = k`` by default).
    """
    l = k if l is None else l
    if not (0 < mu < 1):
        raise ValueError("mu must lie in (0, 1)")
    if not (0 <= k <= l):
        raise ValueError("need 0 <= k <= l")
    mean = mu**k
    var = mu**k * (1 - mu**k) / (1 - mu)
    cov = mu**l * (1 - mu**k) / (1 - mu)
    product = mu**l * (1 - mu ** (k + 1)) / (1 - mu)
    return GWMoments(mean, var, cov, product)
