"""
Choosing the polynomial order with score tests
==============================================

Fitting order d+1 when the truth has order d runs into the boundary of the
parameter space (the leading coefficient must stay negative), so the usual
likelihood-ratio machinery does not apply.  Score tests only need the fit
under the null, stay away from the boundary, and have one-sided half-line
and two-sided whole-line variants with known null distributions.
"""

import numpy as np

from exppoly import (
    Support,
    ThetaUni,
    sample_uni,
    score_test_halfline,
    score_test_realline,
    select_order,
    suff_stats,
)

# ------------------------------------------------------------------
# 1. Data from a genuine cubic on the half line.

true_theta = ThetaUni((-1.0, 3.0, -2.0))
x = sample_uni(true_theta, n=1500, seed=10)

# ------------------------------------------------------------------
# 2. Testing order d-1 inside order d: fit the null, standardize the excess
#    d-th moment.  Under the null the statistic is asymptotically a lower
#    tail of N(0,1): very negative values mean the bigger model's boundary
#    pulls, i.e. the null order is too small.

for d in (2, 3, 4):
    res = score_test_halfline(suff_stats(x, order=d), d)
    verdict = "reject" if res.reject else "keep"
    print(f"H0: order {d - 1}  T = {res.statistic:+8.3f}  "
          f"threshold {res.threshold:.3f}  -> {verdict}")

# ------------------------------------------------------------------
# 3. The sequential rule wraps this: step up from order 1 until a test
#    fails to reject.  A cubic sample should stop at 3.

chosen, trail = select_order(x, d_max=5)
print(f"\nselected order: {chosen}  (rejections: {[bool(t.reject) for t in trail]})")

# ------------------------------------------------------------------
# 4. On the whole line orders step by two (the lead must stay even), and
#    the score statistic combines the two extra moments into a chi-square
#    with 2 degrees of freedom.

gauss = ThetaUni((0.0, -0.5), Support.REAL_LINE)
y = sample_uni(gauss, n=1200, seed=11)
res = score_test_realline(suff_stats(y, order=4, support=Support.REAL_LINE), d_full=4)
print(f"\nGaussian data, H0: order 2 inside order 4  T = {res.statistic:.3f}  "
      f"chi2(2) threshold {res.threshold:.3f}  reject = {res.reject}")

quartic = ThetaUni((1.0, 4.0, -2.0, -3.0), Support.REAL_LINE)
z = sample_uni(quartic, n=1200, seed=12)
res = score_test_realline(suff_stats(z, order=4, support=Support.REAL_LINE), d_full=4)
print(f"quartic data,  same test             T = {res.statistic:.3f}  "
      f"reject = {res.reject}")
