"""
End-to-end measurement protocols built from the lower-level modules:
repeated acquisitions at one pump wavelength, and a pump-wavelength sweep
for the dispersion slope.
"""
from __future__ import annotations

import numpy as np

from .acquisition import mc_ensemble, run_scan
from .errors import DomainError
from .estimator import ensemble_stats, fit_ensemble, fit_interferogram, fit_tod


def precision_run(cfg, runs: int = 100, workers=None, convention="geometric_mean"):
    """Replicate the acquisition ``runs`` times; returns (fits, EnsembleStats)."""
    if runs < 2:
        raise DomainError("runs must be >= 2")
    truth = cfg.dispersion()
    raws = mc_ensemble(truth, cfg.source_model(), cfg.scan_plan(), runs, workers=workers)
    fits = fit_ensemble(raws, convention=convention, d_sign=_sign(cfg.d_value()))
    return fits, ensemble_stats(fits)


def pump_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Pump wavelengths from ``start`` to ``stop`` inclusive, in ascending order."""
    if step == 0:
        raise DomainError("step must be non-zero")
    lo, hi = sorted((start, stop))
    n = int(round((hi - lo) / abs(step))) + 1
    return lo + abs(step) * np.arange(n)


def dispersion_at(cfg, pump: float, slope_ps_nm2_km: float) -> float:
    """Linear D(lambda_p) through the configured value at ``cfg.pump_m``."""
    return cfg.d_value() + slope_ps_nm2_km * (pump - cfg.pump_m) * 1e9


def sweep(cfg, pumps, slope_ps_nm2_km: float, convention="geometric_mean"):
    """Simulate and fit one scan per pump wavelength, then fit the D slope.

    Point k uses run key k of the configured seed. Returns the TodResult.
    """
    pumps = np.sort(np.asarray(pumps, dtype=float))
    if pumps.size < 3:
        raise DomainError("a sweep needs at least 3 pump wavelengths")
    points = []
    for k, pump in enumerate(pumps):
        d_true = dispersion_at(cfg, pump, slope_ps_nm2_km)
        truth = cfg.dispersion(d_override=d_true, pump=pump)
        raw = run_scan(truth, cfg.source_model(pump), cfg.scan_plan(pump), run=k)
        fit = fit_interferogram(raw, convention=convention, d_sign=_sign(d_true))
        points.append((float(pump), fit))
    return fit_tod(points, reference_wavelength=cfg.pump_m)


def _sign(d):
    return -1 if d <= 0 else 1
