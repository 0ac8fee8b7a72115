"""
Working-range map: first-fringe width over a (sample length, D) grid.

Cells are labelled by comparing the fringe width with the filter
bandwidth and the single-photon source width:

* ``too_narrow``  width < ``narrow_factor`` x filter bandwidth
* ``too_wide``    width > source width
* ``wide``        width > ``wide_fraction`` x source width
* ``accessible``  otherwise
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError
from .optics import d_to_beta2, fringe_width

ZONES = ("too_narrow", "accessible", "wide", "too_wide")
RANGEMAP_HEADER = ["length_m", "d_ps_nm_km", "fringe_width_m", "zone"]


@dataclass
class RangeMapGrid:
    lengths: np.ndarray  # m, shape (nL,)
    cd_values: np.ndarray  # ps/(nm km), shape (nD,)
    width: np.ndarray  # m, shape (nL, nD); inf where D == 0
    zone: np.ndarray  # str, shape (nL, nD)
    pump: float
    filter_bandwidth: float
    source_bandwidth: float

    def rows(self):
        for i, L in enumerate(self.lengths):
            for j, d in enumerate(self.cd_values):
                yield float(L), float(d), float(self.width[i, j]), str(self.zone[i, j])


def classify(width, filter_bandwidth=500e-12, source_bandwidth=60e-9,
             narrow_factor=4.0, wide_fraction=0.5):
    """Zone label(s) for fringe width(s) in meters."""
    w = np.asarray(width, dtype=float)
    out = np.full(w.shape, "accessible", dtype=object)
    out[w > wide_fraction * source_bandwidth] = "wide"
    out[w > source_bandwidth] = "too_wide"
    out[w < narrow_factor * filter_bandwidth] = "too_narrow"
    return out if out.ndim else str(out)


def range_map(lengths, cd_values, pump=1560.6e-9, filter_bandwidth=500e-12,
              source_bandwidth=60e-9, narrow_factor=4.0, wide_fraction=0.5) -> RangeMapGrid:
    """Fringe widths and zones; D = 0 columns get an infinite-width sentinel."""
    L = np.asarray(lengths, dtype=float)
    D = np.asarray(cd_values, dtype=float)
    if L.ndim != 1 or D.ndim != 1 or L.size < 2 or D.size < 2:
        raise DomainError("range map needs at least a 2 x 2 grid")
    if np.any(L <= 0):
        raise DomainError("lengths must be > 0")
    if not (filter_bandwidth > 0 and source_bandwidth > 0):
        raise DomainError("bandwidths must be > 0")
    width = np.full((L.size, D.size), math.inf)
    nz = D != 0
    if np.any(nz):
        beta2 = d_to_beta2(D[nz], pump)
        width[:, nz] = fringe_width(pump, beta2[None, :], L[:, None])
    zone = classify(width, filter_bandwidth, source_bandwidth, narrow_factor, wide_fraction)
    return RangeMapGrid(L, D, width, zone, float(pump), filter_bandwidth, source_bandwidth)


def grid_axis(lo, hi, n, scale="auto"):
    """Grid axis; ``auto`` is logarithmic when both ends share a sign."""
    if scale == "auto":
        scale = "log" if lo * hi > 0 else "lin"
    if scale == "log":
        if lo * hi <= 0:
            raise DomainError("log axis needs both ends of the same sign")
        return np.sign(lo) * np.geomspace(abs(lo), abs(hi), n)
    return np.linspace(lo, hi, n)


def write_range_map(grid: RangeMapGrid, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RANGEMAP_HEADER)
        for L, d, width, zone in grid.rows():
            w.writerow([repr(L), repr(d), "inf" if math.isinf(width) else repr(width), zone])


def read_range_map(path) -> RangeMapGrid:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != RANGEMAP_HEADER:
            raise ValueError(f"{path}: not a range-map CSV")
        rows = [(float(a), float(b), float(c), z) for a, b, c, z in reader]
    lengths = np.array(sorted({r[0] for r in rows}))
    cds = np.array(sorted({r[1] for r in rows}))
    li = {v: i for i, v in enumerate(lengths)}
    di = {v: j for j, v in enumerate(cds)}
    width = np.full((lengths.size, cds.size), np.nan)
    zone = np.full(width.shape, "", dtype=object)
    for L, d, wdt, z in rows:
        width[li[L], di[d]] = wdt
        zone[li[L], di[d]] = z
    return RangeMapGrid(lengths, cds, width, zone, math.nan, math.nan, math.nan)
