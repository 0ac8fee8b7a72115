"""
Spectral conversions and the Taylor-series dispersion phase model.

All quantities are SI internally (meters, rad/s, s^n/m). Dispersion is
converted to the customary ps/(nm km) only at the reporting boundary via
:func:`d_to_beta2` / :func:`beta2_to_d`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

C = 299_792_458.0  # m/s, exact

#: 1 ps/(nm km) expressed in s/m^2
PS_PER_NM_KM = 1e-12 / (1e-9 * 1e3)
#: 1 ps/(nm^2 km) expressed in s/m^3
PS_PER_NM2_KM = 1e-12 / (1e-9 * 1e-9 * 1e3)


def _positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return arr


def angular_frequency(wavelength):
    """Vacuum wavelength [m] to angular frequency [rad/s]."""
    wl = _positive("wavelength", wavelength)
    return 2.0 * math.pi * C / wl


def wavelength_from_frequency(omega):
    """Angular frequency [rad/s] to vacuum wavelength [m]."""
    w = _positive("angular frequency", omega)
    return 2.0 * math.pi * C / w


@dataclass(frozen=True)
class SpectralPoint:
    """A spectral position, stored as vacuum wavelength in meters."""

    wavelength: float

    def __post_init__(self):
        _positive("wavelength", self.wavelength)
        object.__setattr__(self, "wavelength", float(self.wavelength))

    @classmethod
    def from_frequency(cls, omega: float) -> "SpectralPoint":
        return cls(float(wavelength_from_frequency(omega)))

    @property
    def angular_frequency(self) -> float:
        return float(angular_frequency(self.wavelength))


def _as_wavelength(x):
    if isinstance(x, SpectralPoint):
        return x.wavelength
    return x


@dataclass(frozen=True)
class TaylorDispersion:
    """Wavevector Taylor series of the sample around ``reference_frequency``.

    ``beta[n]`` is the n-th derivative of k(omega) at the reference, in
    s^n/m. At least orders 0..2 must be present. ``max_order`` truncates
    the even-order sum used by :func:`pair_phase`; the default of 2
    neglects fourth-order dispersion.
    """

    reference_frequency: float
    beta: tuple
    length: float
    max_order: int = 2

    def __post_init__(self):
        _positive("reference_frequency", self.reference_frequency)
        _positive("length", self.length)
        beta = tuple(float(b) for b in self.beta)
        if len(beta) < 3:
            raise DomainError("beta must hold at least orders 0..2")
        if not all(math.isfinite(b) for b in beta):
            raise DomainError("all beta coefficients must be finite")
        if self.max_order < 2:
            raise DomainError("max_order must be >= 2")
        object.__setattr__(self, "beta", beta)

    @classmethod
    def from_d(cls, d_ps_nm_km: float, wavelength: float, length: float,
               extra_orders: Sequence[float] = (), max_order: int = 2):
        """Build a series whose only non-zero low order is beta2 from D."""
        beta2 = d_to_beta2(d_ps_nm_km, wavelength)
        return cls(float(angular_frequency(wavelength)),
                   (0.0, 0.0, beta2, *extra_orders), length, max_order)

    @property
    def beta2(self) -> float:
        return self.beta[2]

    def with_beta(self, order: int, value: float) -> "TaylorDispersion":
        beta = list(self.beta)
        beta.extend([0.0] * (order + 1 - len(beta)))
        beta[order] = value
        return TaylorDispersion(self.reference_frequency, tuple(beta),
                                self.length, self.max_order)


@dataclass(frozen=True)
class DispersionParameter:
    """Dispersion D in ps/(nm km) quoted at a wavelength in meters."""

    d_value: float
    at_wavelength: float

    def __post_init__(self):
        _positive("at_wavelength", self.at_wavelength)


@dataclass(frozen=True)
class FringeWidth:
    delta_lambda: float  # meters


def detuning(signal, pump):
    """Frequency detuning of ``signal`` from the degenerate point ``pump``.

    Returns ``2 pi c (1/lambda_s - 1/lambda_p)`` in rad/s. Both arguments
    may be wavelengths in meters (scalars or arrays) or SpectralPoint.
    """
    ls = _positive("signal wavelength", _as_wavelength(signal))
    lp = _positive("pump wavelength", _as_wavelength(pump))
    out = 2.0 * math.pi * C * (1.0 / ls - 1.0 / lp)
    return float(out) if out.ndim == 0 else out


def _branch_sum(beta, dw_s, dw_i, orders):
    total = 0.0
    for n in orders:
        if n < len(beta) and beta[n] != 0.0:
            total = total + beta[n] * (dw_s ** n + dw_i ** n) / math.factorial(n)
    return total


def default_offset(disp: TaylorDispersion, offset_mode: str = "cascaded",
                   pump_wavevector: float | None = None) -> float:
    """Detuning-independent phase from the series constant term.

    In the cascaded SHG/SPDC loop the pump carries twice the phase of the
    degenerate wavevector, so the constant cancels against ``2 beta0``.
    The bulk loop needs the pump wavevector at twice the frequency.
    """
    if offset_mode == "cascaded":
        # k_0 is the series constant itself
        return 0.0
    if offset_mode == "bulk":
        if pump_wavevector is None:
            raise DomainError("bulk offset needs pump_wavevector")
        return (2.0 * disp.beta[0] - pump_wavevector) * disp.length
    raise DomainError(f"unknown offset_mode {offset_mode!r}")


def pair_phase(disp: TaylorDispersion, dw, offset_mode: str = "cascaded",
               phi_off: float | None = None, pump_wavevector: float | None = None):
    """Relative HH/VV phase of the pair state at signal detuning ``dw``.

    Signal and idler branches are summed with the idler detuning set to
    ``-dw`` before truncation, so every odd order drops out exactly. Even
    orders 2..``disp.max_order`` are kept. ``phi_off`` overrides the
    constant term; otherwise it is derived from ``offset_mode``.
    """
    dw = np.asarray(dw, dtype=float)
    if not np.all(np.isfinite(dw)):
        raise DomainError("detuning must be finite")
    if phi_off is None:
        phi_off = default_offset(disp, offset_mode, pump_wavevector)
    orders = range(1, disp.max_order + 1)
    phase = disp.length * _branch_sum(disp.beta, dw, -dw, orders) + phi_off
    phase = np.asarray(phase, dtype=float)
    return float(phase) if phase.ndim == 0 else phase


def branch_phase(disp: TaylorDispersion, dw_signal, dw_idler, phi_off: float = 0.0):
    """Pair phase with independent signal and idler detunings.

    Uses every coefficient in ``disp.beta`` (odd orders included) and no
    symmetrisation; this is the per-branch form the simulator uses to
    show that odd orders only survive through energy-conservation error.
    """
    dw_s = np.asarray(dw_signal, dtype=float)
    dw_i = np.asarray(dw_idler, dtype=float)
    orders = range(1, len(disp.beta))
    phase = np.asarray(disp.length * _branch_sum(disp.beta, dw_s, dw_i, orders)
                       + phi_off, dtype=float)
    return float(phase) if phase.ndim == 0 else phase


def d_to_beta2(d_ps_nm_km, wavelength=None):
    """Dispersion parameter D [ps/(nm km)] to GVD beta2 [s^2/m].

    ``d_ps_nm_km`` may be a :class:`DispersionParameter`, in which case
    its own wavelength is used.
    """
    if isinstance(d_ps_nm_km, DispersionParameter):
        wavelength = d_ps_nm_km.at_wavelength
        d_ps_nm_km = d_ps_nm_km.d_value
    if wavelength is None:
        raise DomainError("wavelength is required")
    wl = _positive("wavelength", _as_wavelength(wavelength))
    out = -np.asarray(d_ps_nm_km, dtype=float) * PS_PER_NM_KM * wl ** 2 / (2.0 * math.pi * C)
    return float(out) if out.ndim == 0 else out


def beta2_to_d(beta2, wavelength):
    """GVD beta2 [s^2/m] to dispersion parameter D [ps/(nm km)]."""
    wl = _positive("wavelength", _as_wavelength(wavelength))
    out = -np.asarray(beta2, dtype=float) * 2.0 * math.pi * C / wl ** 2 / PS_PER_NM_KM
    return float(out) if out.ndim == 0 else out


def fringe_width(pump, beta2, length):
    """Spectral width of the first quadratic two-photon fringe [m].

    ``(lambda_p^4 / (2 pi c^2 |beta2| L))^(1/2)``: the signal offset at
    which the quadratic phase reaches 2 pi (zero offset phase).
    Vectorises over ``beta2`` and ``length``; scalar inputs give a
    :class:`FringeWidth`.
    """
    lp = _positive("pump wavelength", _as_wavelength(pump))
    b2 = np.asarray(beta2, dtype=float)
    L = np.asarray(length, dtype=float)
    if np.any(b2 == 0) or not np.all(np.isfinite(b2)):
        raise DomainError("beta2 must be finite and non-zero (infinite fringe)")
    if np.any(L <= 0):
        raise DomainError("length must be > 0")
    width = np.sqrt(lp ** 4 / (2.0 * math.pi * C ** 2 * np.abs(b2) * L))
    if width.ndim == 0:
        return FringeWidth(float(width))
    return width
