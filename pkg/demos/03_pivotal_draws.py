"""
Generalized pivotal quantities
==============================

Each pivotal is a function of chi-square and normal draws and the observed
summaries.  Percentiles of many draws give the interval.
"""

import numpy as np

from cvinfer import datasets, gpv

data = datasets.hospital()

# central inputs: U = n - 1 and Z = 0 recover the observed CVs
n = data.n
print("GV1 at centre:", gpv.draw_gv1(data, n - 1, np.zeros(data.k)))
print("weighted CV  :", np.sum((n - 1) * data.sd / data.mean) / np.sum(n - 1))

###############################################################################
# The two GV1 variants differ in how the normal draw is scaled.

for variant in gpv.GV1Variant:
    cfg = gpv.PivotalConfig(draws=100_000, gv1_variant=variant, seed=1)
    s = gpv.pivotal_samples(data, cfg)
    for m in gpv.METHODS:
        lo, hi = gpv.percentile_interval(s[m].values, 0.95)
        print(f"{variant.value:10s} {m}: ({lo:+.4f}, {hi:+.4f})")

###############################################################################
# GV1 and GV3 can go negative because R_i has mass near zero for groups this
# small.  The Monte Carlo error of the endpoints is estimated from batches.

ci = gpv.gpv_ci(data, "GV2", 0.95, gpv.PivotalConfig(draws=100_000, seed=1))
print("GV2", ci.as_tuple(), "batch stderr", ci.diagnostics["mc_stderr"])
print("generalized p-value at 0.2:", gpv.gpv_pvalue(data, "GV2", 0.2))
