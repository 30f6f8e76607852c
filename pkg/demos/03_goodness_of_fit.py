"""Spectral goodness-of-fit: a correct kernel family versus a misspecified one."""
import numpy as np

from hawkesbin import HawkesModel, bin_counts, compute_periodogram, fit, gof_test, simulate
from hawkesbin.kernels import Gaussian

# offspring arrive about 10 time units after their parent, which an exponential kernel cannot express
model = HawkesModel(0.5, 0.7, Gaussian(10.0, 2.0))
series = bin_counts(simulate(model, T=3000.0, rng=np.random.default_rng(3)), 1.0)
pgram = compute_periodogram(series)

for family in ("gauss", "exp"):
    res = fit(series, family, multistart=True)
    for h in (0.05, 0.10):
        rep = gof_test(pgram, res, h)
        flagged = int(np.sum(rep.q2_curve[:, 1] > rep.chi2_95))
        print(f"{family:>5} h={h:.2f}  S={rep.statistic:9.1f}  p={rep.asymptotic_pvalue:.3g}  "
              f"Q2 exceedances={flagged}/{len(rep.q2_curve)}")
