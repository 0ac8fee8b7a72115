"""
Synthetic filter-scan acquisitions with Poisson counting noise.

Every count is drawn from its own Philox stream keyed by
``(seed, run, point, channel)``, so a dataset does not depend on the
order (or the process) in which runs or points are generated.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError
from .optics import TaylorDispersion
from .rates import (FilterPair, NoiseSpec, PhaseMatchingEnvelope, coincidence_rate,
                    idler_partner, singles_rate)

log = logging.getLogger(__name__)

CHANNEL_COINC, CHANNEL_SIGNAL, CHANNEL_IDLER = 0, 1, 2


@dataclass(frozen=True)
class SourceModel:
    """Everything besides the sample dispersion that shapes the rates."""

    envelope: PhaseMatchingEnvelope = PhaseMatchingEnvelope()
    filter_bandwidth: float = 500e-12
    filter_shape: str = "rectangular"
    visibility: float = 0.95
    phi_off: float = 0.0
    noise: NoiseSpec = NoiseSpec()
    per_branch: bool = False
    passband_points: int = 1


@dataclass(frozen=True)
class ScanPlan:
    pump: float
    signal_wavelengths: np.ndarray
    dwell: float = 1.0
    peak_coincidence_rate: float = 5000.0
    peak_singles_rate: float = 100_000.0
    seed: int = 0

    def __post_init__(self):
        wl = np.asarray(self.signal_wavelengths, dtype=float)
        if wl.ndim != 1 or wl.size < 8:
            raise DomainError("a scan needs at least 8 points")
        if np.any(np.diff(wl) <= 0):
            raise DomainError("scan wavelengths must be strictly increasing")
        if not (self.dwell > 0 and self.peak_coincidence_rate > 0 and self.peak_singles_rate > 0):
            raise DomainError("dwell and rates must be > 0")
        if not self.pump > 0:
            raise DomainError("pump wavelength must be > 0")
        object.__setattr__(self, "signal_wavelengths", wl)

    @classmethod
    def centered(cls, pump: float, n_points: int = 100, span: float = 24e-9, **kwargs):
        """Evenly spaced scan of ``span`` meters centered on the degenerate point."""
        wl = np.linspace(pump - span / 2, pump + span / 2, n_points)
        return cls(pump, wl, **kwargs)


@dataclass
class Interferogram:
    """Raw counts per filter position, before normalization."""

    signal_wavelength: np.ndarray
    idler_wavelength: np.ndarray
    coincidences: np.ndarray
    singles_s: np.ndarray
    singles_i: np.ndarray
    pump: float
    dwell: float
    seed: int | None = None
    run: int = 0
    truth: dict | None = None
    length: float | None = None
    warnings: list = field(default_factory=list)

    def __len__(self):
        return len(self.signal_wavelength)

    def __eq__(self, other):
        if not isinstance(other, Interferogram):
            return NotImplemented
        arrays = ("signal_wavelength", "idler_wavelength", "coincidences",
                  "singles_s", "singles_i")
        return (all(np.array_equal(getattr(self, a), getattr(other, a)) for a in arrays)
                and (self.pump, self.dwell, self.seed, self.run, self.truth, self.length)
                == (other.pump, other.dwell, other.seed, other.run, other.truth, other.length))


def stream(seed: int, run: int, point: int, channel: int) -> np.random.Generator:
    """Independent generator for one (seed, run, point, channel) cell."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, run, point, channel])
    return np.random.Generator(np.random.Philox(ss))


def poisson_counts(means, seed: int, run: int, channel: int, points=None) -> np.ndarray:
    """One Poisson draw per point, each from its own derived stream.

    ``points`` gives the scan indices used as stream keys (default 0..n-1).
    """
    means = np.asarray(means, dtype=float)
    if points is None:
        points = range(means.size)
    out = np.empty(means.shape, dtype=np.int64)
    for j, (k, mu) in enumerate(zip(points, means)):
        out[j] = stream(seed, run, int(k), channel).poisson(mu)
    return out


def expected_rates(truth: TaylorDispersion, model: SourceModel, plan: ScanPlan,
                   signal_wavelengths=None):
    """Deterministic (coincidence, singles_s, singles_i) rates along the scan."""
    wl = plan.signal_wavelengths if signal_wavelengths is None else signal_wavelengths
    filt = FilterPair(wl, plan.pump, model.filter_bandwidth, model.filter_shape)
    coinc = coincidence_rate(truth, model.envelope, filt, model.visibility,
                             plan.peak_coincidence_rate, model.noise, model.phi_off,
                             model.per_branch, model.passband_points)
    s, i = singles_rate(model.envelope, filt, plan.peak_singles_rate, model.noise,
                        model.passband_points)
    return np.atleast_1d(coinc), np.atleast_1d(s), np.atleast_1d(i)


def _truth_record(truth: TaylorDispersion, model: SourceModel) -> dict:
    return {"beta2_si": truth.beta2, "length_m": truth.length,
            "phi_off_rad": model.phi_off, "visibility": model.visibility}


def run_scan(truth: TaylorDispersion, model: SourceModel, plan: ScanPlan,
             run: int = 0, noiseless: bool = False) -> Interferogram:
    """Simulate one filter scan.

    With ``noiseless`` the expected counts (floats) are recorded instead
    of Poisson draws. Points past the energy-conservation pole are
    skipped and noted in ``warnings``.
    """
    wl = plan.signal_wavelengths
    keep = wl > 0.5 * plan.pump
    warnings = []
    if not np.all(keep):
        for idx in np.flatnonzero(~keep):
            msg = f"point {idx} at {wl[idx]:.6e} m lies beyond the energy-conservation pole"
            log.warning(msg)
            warnings.append(msg)
    idx = np.flatnonzero(keep)
    wl = wl[idx]
    coinc, s, i = expected_rates(truth, model, plan, wl)
    means = [coinc * plan.dwell, s * plan.dwell, i * plan.dwell]
    if noiseless:
        counts = means
    else:
        counts = [poisson_counts(mu, plan.seed, run, channel, idx)
                  for channel, mu in zip((CHANNEL_COINC, CHANNEL_SIGNAL, CHANNEL_IDLER), means)]
    return Interferogram(
        signal_wavelength=wl, idler_wavelength=np.atleast_1d(idler_partner(wl, plan.pump)),
        coincidences=counts[0], singles_s=counts[1], singles_i=counts[2],
        pump=plan.pump, dwell=plan.dwell, seed=plan.seed, run=run,
        truth=_truth_record(truth, model), length=truth.length, warnings=warnings)


def mc_ensemble(truth: TaylorDispersion, model: SourceModel, plan: ScanPlan, runs: int,
                workers: int | None = None, noiseless: bool = False) -> list:
    """``runs`` independent acquisitions; run k uses the derived key (seed, k)."""
    if runs < 1:
        raise DomainError("runs must be >= 1")

    def one(k):
        return run_scan(truth, model, plan, run=k, noiseless=noiseless)

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, range(runs)))
    return [one(k) for k in range(runs)]


def with_dwell(plan: ScanPlan, dwell: float) -> ScanPlan:
    return replace(plan, dwell=dwell)
