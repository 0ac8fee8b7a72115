"""
Measurable count-rate model of the filter-scanned Sagnac source.

Coincidences follow ``peak * E(dw) * (1 + V cos dphi) / 2`` plus a flat
accidental background; singles carry the same phase-matching envelope E
so that dividing by them removes it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .optics import C, TaylorDispersion, branch_phase, detuning, pair_phase

#: root of sinc^2(x) = 1/2
SINC2_HALF_ARG = 1.39155737825151


@dataclass(frozen=True)
class PhaseMatchingEnvelope:
    """Single-photon spectral envelope of the pair source.

    Parametrized by its full width at half maximum in wavelength around
    ``center`` (meters) rather than by crystal phase mismatch and length.
    """

    center: float = 1560.6e-9
    fwhm: float = 60e-9
    shape: str = "sinc2"

    def __post_init__(self):
        if not self.fwhm > 0:
            raise DomainError("envelope fwhm must be > 0")
        if not self.center > 0:
            raise DomainError("envelope center must be > 0")
        if self.shape not in ("sinc2", "gaussian"):
            raise DomainError(f"unknown envelope shape {self.shape!r}")

    @property
    def half_width_frequency(self) -> float:
        """Half width at half maximum in rad/s (linearized at the center)."""
        return math.pi * C * self.fwhm / self.center ** 2


@dataclass(frozen=True)
class FilterPair:
    """Signal/idler bandpass filters tuned to energy-conserving partners.

    ``signal_center`` may be an array to describe a whole scan.
    """

    signal_center: float
    pump: float
    bandwidth: float = 500e-12
    shape: str = "rectangular"

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise DomainError("filter bandwidth must be > 0")
        if self.shape not in ("rectangular", "gaussian"):
            raise DomainError(f"unknown filter shape {self.shape!r}")

    @property
    def idler_center(self):
        return idler_partner(self.signal_center, self.pump)


@dataclass(frozen=True)
class NoiseSpec:
    """Flat SBRS background.

    ``sbrs_coincidence_fraction`` is the accidental coincidence rate as a
    fraction of the peak pair rate; ``sbrs_singles_rate`` (counts/s) is
    added to each singles channel and also absorbs detector dark counts.
    """

    sbrs_coincidence_fraction: float = 0.0
    sbrs_singles_rate: float = 0.0

    def __post_init__(self):
        if self.sbrs_coincidence_fraction < 0 or self.sbrs_singles_rate < 0:
            raise DomainError("noise terms must be >= 0")


def idler_partner(signal, pump):
    """Energy-conserving idler wavelength ``1 / (2/lambda_p - 1/lambda_s)``."""
    ls = np.asarray(signal, dtype=float)
    lp = float(pump)
    if np.any(ls <= 0) or lp <= 0:
        raise DomainError("wavelengths must be > 0")
    inv = 2.0 / lp - 1.0 / ls
    if np.any(inv <= 0):
        raise DomainError("signal wavelength beyond the energy-conservation pole (2 lambda_p)")
    out = 1.0 / inv
    return float(out) if out.ndim == 0 else out


def envelope_value(env: PhaseMatchingEnvelope, dw):
    """Envelope at detuning ``dw`` [rad/s], 1 at zero and 1/2 at the half width."""
    u = np.asarray(dw, dtype=float) / env.half_width_frequency
    if env.shape == "sinc2":
        x = SINC2_HALF_ARG * u
        out = np.sinc(x / math.pi) ** 2
    else:
        out = np.exp(-math.log(2.0) * u * u)
    return float(out) if out.ndim == 0 else out


def _passband_nodes(filt: FilterPair, points: int):
    """Wavelength offsets and weights averaging over the signal passband."""
    if points <= 1:
        return np.zeros(1), np.ones(1)
    if filt.shape == "rectangular":
        x, w = np.polynomial.legendre.leggauss(points)
        return 0.5 * filt.bandwidth * x, w / w.sum()
    # bandwidth is the FWHM of a Gaussian passband
    sigma = filt.bandwidth / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    x, w = np.polynomial.hermite_e.hermegauss(points)
    return sigma * x, w / w.sum()


def _fringe_terms(disp, env, filt, vis, phi_off, per_branch, passband_points):
    """Passband-averaged envelope*fringe and per-channel envelopes."""
    ls0 = np.asarray(filt.signal_center, dtype=float)
    offsets, weights = _passband_nodes(filt, passband_points)
    coinc = np.zeros_like(ls0)
    env_s = np.zeros_like(ls0)
    env_i = np.zeros_like(ls0)
    for off, w in zip(offsets, weights):
        ls = ls0 + off
        li = idler_partner(ls, filt.pump)
        dw_s = detuning(ls, filt.pump)
        dw_i = detuning(li, filt.pump)
        if per_branch:
            phase = branch_phase(disp, dw_s, dw_i, phi_off)
        else:
            phase = pair_phase(disp, dw_s, phi_off=phi_off)
        es = envelope_value(env, dw_s)
        coinc = coinc + w * es * 0.5 * (1.0 + vis * np.cos(phase))
        env_s = env_s + w * es
        env_i = env_i + w * envelope_value(env, dw_i)
    return coinc, env_s, env_i


def coincidence_rate(disp: TaylorDispersion, env: PhaseMatchingEnvelope, filt: FilterPair,
                     vis: float, peak_rate: float, noise: NoiseSpec = NoiseSpec(),
                     phi_off: float = 0.0, per_branch: bool = False,
                     passband_points: int = 1):
    """Expected coincidence rate [counts/s] with the filters at ``filt``.

    By default the model is evaluated at the filter center; pass
    ``passband_points=9`` to average over the passband by quadrature.
    ``per_branch`` evaluates the phase from the separate signal and idler
    detunings with all Taylor orders (see :func:`optics.branch_phase`).
    """
    if not peak_rate > 0:
        raise DomainError("peak_rate must be > 0")
    if not 0.0 <= vis <= 1.0:
        raise DomainError("visibility must lie in [0, 1]")
    coinc, _, _ = _fringe_terms(disp, env, filt, vis, phi_off, per_branch, passband_points)
    rate = peak_rate * coinc + peak_rate * noise.sbrs_coincidence_fraction
    rate = np.maximum(rate, 0.0)
    return float(rate) if rate.ndim == 0 else rate


def singles_rate(env: PhaseMatchingEnvelope, filt: FilterPair, peak_singles: float,
                 noise: NoiseSpec = NoiseSpec(), passband_points: int = 1):
    """Expected (signal, idler) singles rates [counts/s]."""
    if not peak_singles > 0:
        raise DomainError("peak_singles must be > 0")
    ls0 = np.asarray(filt.signal_center, dtype=float)
    offsets, weights = _passband_nodes(filt, passband_points)
    env_s = np.zeros_like(ls0)
    env_i = np.zeros_like(ls0)
    for off, w in zip(offsets, weights):
        ls = ls0 + off
        env_s = env_s + w * envelope_value(env, detuning(ls, filt.pump))
        env_i = env_i + w * envelope_value(env, detuning(idler_partner(ls, filt.pump), filt.pump))
    s = peak_singles * env_s + noise.sbrs_singles_rate
    i = peak_singles * env_i + noise.sbrs_singles_rate
    if s.ndim == 0:
        return float(s), float(i)
    return s, i
