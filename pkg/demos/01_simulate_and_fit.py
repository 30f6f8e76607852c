"""Simulate a Hawkes process, bin it and recover the parameters from the counts alone."""
import numpy as np

from hawkesbin import HawkesModel, bin_counts, fit, simulate
from hawkesbin.kernels import Exponential

truth = {"eta": 1.0, "mu": 0.5, "beta": 1.0}
model = HawkesModel(truth["eta"], truth["mu"], Exponential(truth["beta"]))
events = simulate(model, T=2000.0, rng=np.random.default_rng(1))
series = bin_counts(events, delta=1.0)
print(f"{len(events.times)} events in {series.n} unit bins, mean count {series.counts.mean():.2f}")

res = fit(series, "exp")
se = np.sqrt(np.diag(res.covariance)) if res.covariance is not None else [np.nan] * 3
print(f"{'param':>6} {'truth':>7} {'estimate':>9} {'std err':>8}")
for name, est, s in zip(res.family.names, res.estimate, se):
    print(f"{name:>6} {truth[name]:7.3f} {est:9.3f} {s:8.3f}")
