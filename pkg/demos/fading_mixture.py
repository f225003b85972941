r"""
Fluctuating two-ray fading as a gamma mixture
---------------------------------------------
The power gain of an FTR link is a Poisson-weighted mixture of gamma
densities. This script builds the mixture weights for the reference channel
(m=2, K=4, Delta=0.5, 2 sigma^2 = 0.2), checks them against direct sampling
of the two-wave construction, and shows how many terms the series keeps.
"""
import numpy as np
from scipy import stats

from thzcov.montecarlo import block_rng, sample_ftr
from thzcov.specfun import FtrParams, SeriesControl, ftr_cdf, ftr_pdf, ftr_weights

p = FtrParams(m=2.0, big_k=4.0, delta=0.5, sigma_sq=0.1)

#%%
# The weights are non-negative and sum to one up to the truncation tail.
w = ftr_weights(p)
print(f"{len(w)} terms kept, tail mass {1 - w.sum():.1e}")
print("largest weights at j =", np.argsort(w)[::-1][:5])

#%%
# Tightening the tolerance keeps more terms; the rule stops once three
# consecutive terms fall below rel_tol times the running sum.
for tol in (1e-6, 1e-9, 1e-12):
    print(tol, len(ftr_weights(p, SeriesControl(rel_tol=tol))))

#%%
# Density and distribution function on a few points, next to a histogram of
# 200k direct draws.
draws = sample_ftr(p, block_rng(seed=1, block=0), 200_000)
edges = np.linspace(0, 4, 17)
hist, _ = np.histogram(draws, edges, density=True)
mid = 0.5 * (edges[1:] + edges[:-1])
for x, emp, ana in zip(mid, hist, ftr_pdf(mid, p)):
    print(f"h={x:4.2f}  sampled {emp:6.4f}  series {ana:6.4f}")

print("sample mean", draws.mean(), "(exact 2 sigma^2 (1 + K) =", p.mean_power, ")")
print("KS distance", stats.kstest(draws, lambda x: ftr_cdf(x, p)).statistic)

#%%
# Delta controls how much the two specular waves can cancel. Delta = 0 is a
# single specular wave (Rician-like shadowed fading); Delta = 1 allows deep
# nulls, which shows up as more mass near zero.
for delta in (0.0, 0.5, 1.0):
    q = FtrParams(2.0, 4.0, delta, 0.1)
    print(f"Delta={delta:3.1f}  P(H < 0.1) = {ftr_cdf(0.1, q):.4f}")
