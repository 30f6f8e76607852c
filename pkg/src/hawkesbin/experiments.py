"""Monte Carlo studies of estimator error as the observation window grows.

Each ``(T, replicate)`` cell simulates one realisation from its own seed,
bins it at every ``delta`` in the grid and runs every method on it, so
comparisons across bin widths and methods share their randomness.
"""
from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .mle import mle_fit
from .params import ModelFamily
from .simulation import DEFAULT_BURNIN, bin_counts, simulate
from .whittle import fit

__all__ = ["StudyConfig", "MseRow", "MseTable", "run_study", "METHODS", "cell_rng", "default_threads"]

THREADS_ENV = "HAWKESBIN_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _whittle(realization, series, family, truth):
    res = fit(series, family)
    return res.estimate, res.converged


def _mle(realization, series, family, truth):
    res = mle_fit(realization, family)
    return res.estimate, res.converged


def _with_bins(fn):
    fn.uses_bins = True
    return fn


# method(realization, series, family, truth) -> (estimate, converged)
# a method with ``uses_bins = True`` runs once per bin width, otherwise once per cell
METHODS = {"whittle": _with_bins(_whittle), "mle": _mle}


@dataclass
class StudyConfig:
    family: str = "exp"
    truth: dict = field(default_factory=lambda: {"eta": 1.0, "mu": 0.5, "beta": 1.0})
    T_grid: tuple = (100.0, 250.0, 500.0, 1000.0)
    delta_grid: tuple = (1.0,)
    replicates: int = 100
    methods: tuple = ("whittle",)
    seed: int = 0
    burnin: float = DEFAULT_BURNIN

    def __post_init__(self):
        self.T_grid = tuple(float(t) for t in self.T_grid)
        self.delta_grid = tuple(float(d) for d in self.delta_grid)
        self.methods = tuple(self.methods)
        if self.replicates < 10:
            raise ValueError("a study needs at least 10 replicates")
        if not self.T_grid or min(self.T_grid) <= 0:
            raise ValueError("T grid must be non-empty and positive")
        if not self.delta_grid or min(self.delta_grid) <= 0:
            raise ValueError("delta grid must be non-empty and positive")
        fam = self.model_family
        missing = set(fam.names) - set(self.truth)
        if missing:
            raise ValueError(f"true values missing for {sorted(missing)}")

    @property
    def model_family(self) -> ModelFamily:
        return ModelFamily.parse(self.family)

    @property
    def theta0(self) -> np.ndarray:
        return np.array([float(self.truth[k]) for k in self.model_family.names])

    @classmethod
    def from_dict(cls, d: dict) -> "StudyConfig":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(d) - known
        if bad:
            raise ValueError(f"unknown study options {sorted(bad)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "StudyConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("T_grid", "delta_grid", "methods"):
            d[k] = list(d[k])
        return d


@dataclass(frozen=True)
class MseRow:
    method: str
    T: float
    delta: float | None
    parameter: str
    mean: float
    mse: float
    mse_se: float
    n_used: int
    n_excluded: int


@dataclass
class MseTable:
    rows: list
    slopes: dict
    estimates: dict = field(repr=False, default_factory=dict)

    def cell(self, method, T, delta=None) -> np.ndarray:
        """Replicate estimates for one cell (``nan`` rows for excluded fits)."""
        return self.estimates[(method, float(T), None if delta is None else float(delta))]

    def row(self, method, T, delta, parameter) -> MseRow:
        d = None if delta is None else float(delta)
        for r in self.rows:
            if (r.method, r.T, r.delta, r.parameter) == (method, float(T), d, parameter):
                return r
        raise KeyError((method, T, delta, parameter))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "T", "delta", "parameter", "mean", "mse", "mse_se", "n_used", "n_excluded"])
        for r in self.rows:
            w.writerow([r.method, repr(r.T), "" if r.delta is None else repr(r.delta), r.parameter,
                        repr(r.mean), repr(r.mse), repr(r.mse_se), r.n_used, r.n_excluded])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "rows": [{k: _finite(v) for k, v in asdict(r).items()} for r in self.rows],
            "slopes": [{"method": m, "delta": d, "parameter": p, "slope": s}
                       for (m, d, p), s in self.slopes.items()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)


def _finite(v):
    return None if isinstance(v, float) and not np.isfinite(v) else v


def cell_rng(seed: int, T: float, replicate: int) -> np.random.Generator:
    """Generator for one ``(T, replicate)`` cell, independent of the rest of the grid."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(round(T * 1000)), replicate)))


def _run_cell(config: StudyConfig, methods: dict, T: float, r: int):
    family = config.model_family
    truth = config.theta0
    model = family.model(truth)
    realization = simulate(model, T, burnin=config.burnin, rng=cell_rng(config.seed, T, r))
    out = {}
    for name, method in methods.items():
        if getattr(method, "uses_bins", False):
            for delta in config.delta_grid:
                out[(name, delta)] = _safe(method, realization, bin_counts(realization, delta), family, truth)
        else:
            out[(name, None)] = _safe(method, realization, None, family, truth)
    return out


def _safe(method, realization, series, family, truth):
    try:
        est, ok = method(realization, series, family, truth)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError):
        return None
    est = np.asarray(est, dtype=float)
    return est if ok and np.all(np.isfinite(est)) else None


def _slope(T, mse):
    T, mse = np.asarray(T), np.asarray(mse)
    ok = mse > 0
    if ok.sum() < 2:
        return None
    if np.allclose(mse[ok], mse[ok][0], rtol=1e-12, atol=0):
        return 0.0
    return float(np.polyfit(np.log(T[ok]), np.log(mse[ok]), 1)[0])


def run_study(config: StudyConfig, methods: dict | None = None, threads: int | None = None) -> MseTable:
    """Simulate, fit and aggregate MSE per ``(method, T, delta, parameter)``.

    ``methods`` maps names to callables and defaults to the entries of
    :data:`METHODS` named in ``config.methods``; custom callables follow the
    same signature. With ``threads > 1`` replicates run in worker processes;
    results do not depend on the worker count.
    """
    if methods is None:
        unknown = set(config.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        methods = {m: METHODS[m] for m in config.methods}
    threads = default_threads() if threads is None else max(1, int(threads))
    tasks = [(T, r) for T in config.T_grid for r in range(config.replicates)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_cell, config, methods, T, r) for T, r in tasks]
            results = [f.result() for f in futures]
    else:
        results = [_run_cell(config, methods, T, r) for T, r in tasks]

    names = config.model_family.names
    truth = config.theta0
    p = len(names)
    estimates = {}
    for (T, r), res in zip(tasks, results):
        for (name, delta), est in res.items():
            key = (name, T, delta)
            if key not in estimates:
                estimates[key] = np.full((config.replicates, p), np.nan)
            if est is not None:
                estimates[key][r] = est

    rows = []
    for (name, T, delta), est in estimates.items():
        ok = np.all(np.isfinite(est), axis=1)
        used = est[ok]
        for i, pname in enumerate(names):
            if len(used):
                err2 = (used[:, i] - truth[i]) ** 2
                mean = float(np.mean(used[:, i]))
                mse = float(np.mean(err2))
                se = float(np.std(err2, ddof=1) / np.sqrt(len(err2))) if len(err2) > 1 else float("nan")
            else:
                mean = mse = se = float("nan")
            rows.append(MseRow(name, T, delta, pname, mean, mse, se, int(ok.sum()), int((~ok).sum())))

    slopes = {}
    for name, delta in dict.fromkeys((k[0], k[2]) for k in estimates):
        for pname in names:
            sub = [r for r in rows if (r.method, r.delta, r.parameter) == (name, delta, pname)]
            slopes[(name, delta, pname)] = _slope([r.T for r in sub], [r.mse for r in sub])
    return MseTable(rows, slopes, estimates)
