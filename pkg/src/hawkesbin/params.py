"""Parameter vectors for model families and box-constraint transforms."""
from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np
from scipy.special import expit, logit

from .kernels import KERNEL_FAMILIES, parse_family
from .simulation import HawkesModel

__all__ = ["ModelFamily", "BoxTransform", "DEFAULT_BOUNDS"]

INF = float("inf")

DEFAULT_BOUNDS: dict[str, tuple[float, float]] = {
    "eta": (0.0, INF),
    "mu": (0.0, 1.0),
    "beta": (0.0, INF),
    "gamma": (0.0, 30.0),
    "a": (0.0, INF),
    "nu": (-INF, INF),
    "sigma": (0.0, INF),
}


@dataclass(frozen=True)
class ModelFamily:
    """A kernel family with some kernel parameters optionally held fixed.

    The free parameter vector is ``(eta, mu, *free kernel parameters)``.

    >>> ModelFamily("powerlaw", {"a": 1.5}).names
    ('eta', 'mu', 'gamma')
    """

    kernel: str
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kernel not in KERNEL_FAMILIES:
            raise ValueError(f"unknown kernel family {self.kernel!r}")
        bad = set(self.fixed) - set(self.kernel_names)
        if bad:
            raise ValueError(f"cannot fix {sorted(bad)} for {self.kernel}")

    @classmethod
    def parse(cls, text: str) -> "ModelFamily":
        """``"exp"``, ``"powerlaw:a=1.5"`` (``a`` fixed), ``"gauss"``."""
        name, values = parse_family(text)
        return cls(name, values)

    @property
    def kernel_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in fields(KERNEL_FAMILIES[self.kernel]))

    @property
    def free_kernel_names(self) -> tuple[str, ...]:
        return tuple(k for k in self.kernel_names if k not in self.fixed)

    @property
    def names(self) -> tuple[str, ...]:
        return ("eta", "mu") + self.free_kernel_names

    def model(self, theta) -> HawkesModel:
        theta = np.asarray(theta, dtype=float)
        kp = dict(self.fixed)
        kp.update(zip(self.free_kernel_names, theta[2:]))
        return HawkesModel(float(theta[0]), float(theta[1]), KERNEL_FAMILIES[self.kernel](**kp))

    def vector(self, model: HawkesModel) -> np.ndarray:
        kp = model.kernel.params
        return np.array([float(model.eta), model.mu] + [kp[k] for k in self.free_kernel_names])

    def bounds(self, overrides: dict | None = None) -> tuple[np.ndarray, np.ndarray]:
        b = {k: DEFAULT_BOUNDS[k] for k in self.names}
        for k, v in (overrides or {}).items():
            if k not in b:
                raise ValueError(f"no parameter {k!r} in {self.names}")
            lo, hi = float(v[0]), float(v[1])
            if not lo < hi:
                raise ValueError(f"invalid bounds for {k}: {v}")
            dlo, dhi = DEFAULT_BOUNDS[k]
            if lo < dlo or hi > dhi:
                raise ValueError(f"bounds for {k} must lie within {DEFAULT_BOUNDS[k]}")
            b[k] = (lo, hi)
        lower = np.array([b[k][0] for k in self.names])
        upper = np.array([b[k][1] for k in self.names])
        return lower, upper

    def label(self) -> str:
        if not self.fixed:
            return self.kernel
        return self.kernel + ":" + ",".join(f"{k}={v!r}" for k, v in self.fixed.items())


class BoxTransform:
    """Elementwise bijection between an open box and R^p.

    ``(lo, hi)`` finite uses a scaled logit, half-open boxes use a shifted log
    and the whole real line the identity.
    """

    def __init__(self, lower, upper):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if np.any(self.lower >= self.upper):
            raise ValueError("lower bounds must be below upper bounds")
        fl, fu = np.isfinite(self.lower), np.isfinite(self.upper)
        self._both = fl & fu
        self._lo = fl & ~fu
        self._hi = ~fl & fu

    def inside(self, theta) -> bool:
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(theta > self.lower) and np.all(theta < self.upper))

    def to_unconstrained(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if not self.inside(theta):
            raise ValueError(f"parameters {theta} outside the open box")
        u = theta.copy()
        b, lo, hi = self._both, self._lo, self._hi
        u[b] = logit((theta[b] - self.lower[b]) / (self.upper[b] - self.lower[b]))
        u[lo] = np.log(theta[lo] - self.lower[lo])
        u[hi] = -np.log(self.upper[hi] - theta[hi])
        return u

    def to_constrained(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        theta = u.copy()
        b, lo, hi = self._both, self._lo, self._hi
        theta[b] = self.lower[b] + (self.upper[b] - self.lower[b]) * expit(u[b])
        theta[lo] = self.lower[lo] + np.exp(u[lo])
        theta[hi] = self.upper[hi] - np.exp(-u[hi])
        return theta
