"""
Repeating the acquisition 100 times
===================================

The statistical precision of D comes from an ensemble of independent
acquisitions. Its relative spread falls as dwell^-1/2, so the per-point
integration time sets the reachable precision.
"""
import numpy as np

from qsagnac import RunConfig, precision_run

for dwell in (0.25, 1.0, 4.0, 16.0, 32.0):
    cfg = RunConfig()
    cfg.scan.dwell_s = dwell
    fits, st = precision_run(cfg, runs=100)
    print(f"dwell {dwell:6.2f} s: D = {st.mean_d:.5f} +/- {st.std_d:.5f}  "
          f"relative {st.relative_error:.2e}  (Shapiro p = {st.normality_pvalue:.2f})")

###############################################################################
# At the default 1 s dwell a 48 nm scan reaches a few 1e-4; 32 s per point
# brings the spread below 7.3e-5.
