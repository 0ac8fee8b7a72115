"""
Polarization-state algebra of the nonlinear Sagnac loop.

The clockwise path converts a V-polarized pump into |HH> pairs after the
loop half-wave plate; the counter-clockwise path converts the H pump
(rotated to V before the crystal) into |VV> pairs that then cross the
sample. The output is their coherent sum.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError, DomainError

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class PumpState:
    amp_h: complex
    amp_v: complex

    def __post_init__(self):
        norm = abs(self.amp_h) ** 2 + abs(self.amp_v) ** 2
        if abs(norm - 1.0) > _NORM_TOL:
            raise DomainError(f"pump state not normalized (|h|^2+|v|^2 = {norm})")

    @classmethod
    def diagonal(cls) -> "PumpState":
        a = 1.0 / math.sqrt(2.0)
        return cls(complex(a), complex(a))

    @classmethod
    def from_amplitudes(cls, amp_h: complex, amp_v: complex) -> "PumpState":
        norm = math.sqrt(abs(amp_h) ** 2 + abs(amp_v) ** 2)
        if norm == 0.0:
            raise DegenerateStateError("pump has zero amplitude in both polarizations")
        return cls(complex(amp_h) / norm, complex(amp_v) / norm)


@dataclass(frozen=True)
class DirectionalPhase:
    """Phases picked up along one loop direction.

    ``phi_pump`` is the pump phase before conversion (phi_p, or 2 phi_0
    when the pump is frequency-doubled inside the loop); ``phi_pair`` is
    the summed signal + idler phase after conversion.
    """

    phi_pump: float = 0.0
    phi_pair: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.phi_pump) and math.isfinite(self.phi_pair)):
            raise DomainError("directional phases must be finite")


@dataclass(frozen=True)
class TwoPhotonState:
    amp_hh: complex
    amp_vv: complex

    @property
    def relative_phase(self) -> float:
        """Phase of the |VV> term relative to |HH>."""
        return cmath.phase(self.amp_vv * self.amp_hh.conjugate())

    @property
    def norm(self) -> float:
        return abs(self.amp_hh) ** 2 + abs(self.amp_vv) ** 2


def propagate(pump: PumpState, cwi: DirectionalPhase, ccwi: DirectionalPhase,
              brightness_ratio: float = 1.0) -> TwoPhotonState:
    """Coherent output of both loop directions.

    The CWi path converts the V pump component and only the pump phase is
    carried to the pairs; the CCWi path converts the H component and the
    pairs carry their own phase. ``brightness_ratio`` is the CWi/CCWi
    pair-generation efficiency ratio.
    """
    if not brightness_ratio > 0:
        raise DomainError("brightness_ratio must be > 0")
    hh = pump.amp_v * math.sqrt(brightness_ratio) * cmath.exp(1j * cwi.phi_pump)
    vv = pump.amp_h * cmath.exp(1j * ccwi.phi_pair)
    norm = math.sqrt(abs(hh) ** 2 + abs(vv) ** 2)
    if norm == 0.0:
        raise DegenerateStateError("pump has zero amplitude in both polarizations")
    return TwoPhotonState(hh / norm, vv / norm)


def coincidence_probability(state: TwoPhotonState, analyzer_angle_s: float,
                            analyzer_angle_i: float) -> float:
    """Joint detection probability behind two linear polarizers."""
    amp = (math.cos(analyzer_angle_s) * math.cos(analyzer_angle_i) * state.amp_hh
           + math.sin(analyzer_angle_s) * math.sin(analyzer_angle_i) * state.amp_vv)
    return abs(amp) ** 2


def diagonal_fringe(state: TwoPhotonState) -> float:
    """Normalized fringe ``(1 + V cos dphi) / 2`` seen with both analyzers at 45 deg.

    Twice the diagonal-basis coincidence probability, so a balanced state
    gives 1 at zero relative phase.
    """
    quarter = math.pi / 4.0
    return 2.0 * coincidence_probability(state, quarter, quarter) / state.norm


def state_visibility(state: TwoPhotonState, overlap: float = 1.0) -> float:
    """Two-photon visibility of ``state`` reduced by a spectral-overlap factor."""
    if not 0.0 <= overlap <= 1.0:
        raise DomainError("overlap must lie in [0, 1]")
    a, b = abs(state.amp_hh), abs(state.amp_vv)
    return overlap * 2.0 * a * b / (a * a + b * b)


def sagnac_output(delta_phi, visibility: float = 1.0):
    """Vectorised diagonal-basis fringe for an array of relative phases."""
    return 0.5 * (1.0 + visibility * np.cos(delta_phi))
