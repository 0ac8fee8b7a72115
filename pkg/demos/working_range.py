"""
Which samples can be measured
=============================

The first fringe must be wider than a few filter bandwidths and narrower
than the source spectrum. Map the fringe width over sample length and
dispersion and label the zones.
"""
from pathlib import Path

import numpy as np

from qsagnac import grid_axis, range_map
from qsagnac.plotting import plot_rangemap

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

grid = range_map(grid_axis(0.01, 1000, 81), grid_axis(0.1, 200, 81),
                 filter_bandwidth=500e-12, source_bandwidth=60e-9)
zones, counts = np.unique(grid.zone, return_counts=True)
for z, n in zip(zones, counts):
    print(f"{z:>11}: {n} cells")

i = np.argmin(np.abs(grid.lengths - 0.9))
j = np.argmin(np.abs(grid.cd_values - 81.654))
print(f"L = {grid.lengths[i]:.2f} m, |D| = {grid.cd_values[j]:.1f}: "
      f"{grid.width[i, j] * 1e9:.2f} nm ({grid.zone[i, j]})")
plot_rangemap(grid, out / "working_range.svg")
