import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsagnac.errors import DomainError
from qsagnac.optics import C, TaylorDispersion, angular_frequency, detuning
from qsagnac.rates import (SINC2_HALF_ARG, FilterPair, NoiseSpec, PhaseMatchingEnvelope,
                           coincidence_rate, envelope_value, idler_partner, singles_rate)

PUMP = 1560.6e-9
BETA2_EX = 1.0558e-25

# mpmath oracles
IDLER_1570 = 1.55131189059136e-6
SINC2_ZERO_OVER_HALF = 2.2576091382859  # pi / root of sinc^2(x) = 1/2
NULL_RED = 7.469978022305e-9  # first null offsets (long- and short-wavelength side)
NULL_BLUE = -7.399144437362e-9


def disp(beta2=BETA2_EX, length=0.9, extra=(), max_order=2):
    return TaylorDispersion(float(angular_frequency(PUMP)), (0.0, 0.0, beta2, *extra), length,
                            max_order)


def scan(n=401, half=24e-9):
    return np.linspace(PUMP - half, PUMP + half, n)


ENV = PhaseMatchingEnvelope()


class TestIdlerPartner:
    def test_degenerate(self):
        assert idler_partner(PUMP, PUMP) == pytest.approx(PUMP, rel=1e-15)

    def test_oracle(self):
        assert idler_partner(1570e-9, PUMP) == pytest.approx(IDLER_1570, rel=1e-12)

    @given(ls=st.floats(1.2e-6, 2.0e-6))
    def test_involution(self, ls):
        assert idler_partner(idler_partner(ls, PUMP), PUMP) == pytest.approx(ls, rel=1e-12)

    def test_energy_conservation(self):
        f = FilterPair(1570e-9, PUMP)
        assert 1 / f.signal_center + 1 / f.idler_center == pytest.approx(2 / PUMP, rel=1e-12)

    def test_pole(self):
        with pytest.raises(DomainError):
            idler_partner(0.45 * PUMP, PUMP)


class TestEnvelope:
    @pytest.mark.parametrize("shape", ["sinc2", "gaussian"])
    def test_peak(self, shape):
        assert envelope_value(PhaseMatchingEnvelope(shape=shape), 0.0) == 1.0

    @pytest.mark.parametrize("shape", ["sinc2", "gaussian"])
    def test_half_maximum(self, shape):
        env = PhaseMatchingEnvelope(shape=shape)
        dw = env.half_width_frequency
        assert envelope_value(env, dw) == pytest.approx(0.5, abs=1e-9)
        assert envelope_value(env, -dw) == pytest.approx(0.5, abs=1e-9)

    def test_half_maximum_in_wavelength(self):
        # linearized width: half the FWHM in wavelength lands near (not exactly at) 1/2
        dw = detuning(PUMP + 30e-9, PUMP)
        assert envelope_value(ENV, dw) == pytest.approx(0.5, abs=0.02)

    def test_sinc2_first_zero_ratio(self):
        assert math.pi / SINC2_HALF_ARG == pytest.approx(SINC2_ZERO_OVER_HALF, rel=1e-12)
        dw0 = SINC2_ZERO_OVER_HALF * ENV.half_width_frequency
        assert envelope_value(ENV, dw0) == pytest.approx(0.0, abs=1e-20)

    @given(dw=st.floats(-1e15, 1e15))
    def test_bounded(self, dw):
        for shape in ("sinc2", "gaussian"):
            v = envelope_value(PhaseMatchingEnvelope(shape=shape), dw)
            assert 0.0 <= v <= 1.0

    @pytest.mark.parametrize("kw", [{"fwhm": 0.0}, {"center": -1.0}, {"shape": "lorentz"}])
    def test_validation(self, kw):
        with pytest.raises(DomainError):
            PhaseMatchingEnvelope(**kw)


class TestCoincidenceRate:
    def test_peak_at_degeneracy(self):
        f = FilterPair(PUMP, PUMP)
        assert coincidence_rate(disp(), ENV, f, 1.0, 5000.0) == pytest.approx(5000.0, rel=1e-15)

    def test_null_at_pi(self):
        dw = math.sqrt(math.pi / (BETA2_EX * 0.9))
        ls = 2 * math.pi * C / (angular_frequency(PUMP) + dw)
        rate = coincidence_rate(disp(), PhaseMatchingEnvelope(fwhm=1e-3), FilterPair(ls, PUMP),
                                1.0, 5000.0)
        assert rate == pytest.approx(0.0, abs=1e-8)

    def test_first_null_position(self):
        wl = PUMP + np.linspace(-9e-9, 9e-9, 180001)
        r = coincidence_rate(disp(), ENV, FilterPair(wl, PUMP), 1.0, 5000.0)
        red = wl > PUMP + 4e-9
        blue = wl < PUMP - 4e-9
        assert wl[red][np.argmin(r[red])] - PUMP == pytest.approx(NULL_RED, abs=2e-13)
        assert wl[blue][np.argmin(r[blue])] - PUMP == pytest.approx(NULL_BLUE, abs=2e-13)
        assert abs(NULL_RED) == pytest.approx(10.5e-9 / math.sqrt(2), rel=0.01)

    def test_background(self):
        f = FilterPair(PUMP, PUMP)
        noise = NoiseSpec(0.01, 0.0)
        assert coincidence_rate(disp(), ENV, f, 1.0, 5000.0, noise) == pytest.approx(5050.0)

    @settings(max_examples=100, deadline=None)
    @given(b2=st.floats(-3e-25, 3e-25), phi=st.floats(-7, 7), v=st.floats(0, 1),
           ls=st.floats(1.50e-6, 1.62e-6))
    def test_non_negative(self, b2, phi, v, ls):
        r = coincidence_rate(disp(beta2=b2), ENV, FilterPair(ls, PUMP), v, 5000.0, phi_off=phi)
        assert r >= 0.0

    def test_chirp(self):
        wl = PUMP + np.linspace(0, 24e-9, 240001)
        r = coincidence_rate(disp(), PhaseMatchingEnvelope(fwhm=1e-3), FilterPair(wl, PUMP),
                             1.0, 1.0)
        inner = (r[1:-1] < r[:-2]) & (r[1:-1] <= r[2:])
        nulls = wl[1:-1][inner]
        assert nulls.size >= 4
        assert np.all(np.diff(np.diff(nulls)) < 0)

    def test_passband_quadrature_close_to_center_value(self):
        # inside the first fringe the center evaluation is good to O((filter/fringe)^2)
        wl = scan(half=5e-9)
        f = FilterPair(wl, PUMP)
        centre = coincidence_rate(disp(), ENV, f, 0.95, 5000.0)
        avg = coincidence_rate(disp(), ENV, f, 0.95, 5000.0, passband_points=9)
        assert np.max(np.abs(avg - centre)) / 5000.0 < 3e-3

    @pytest.mark.parametrize("shape", ["rectangular", "gaussian"])
    def test_passband_error_scales_with_bandwidth_squared(self, shape):
        wl = scan(half=12e-9)

        def err(bw):
            f = FilterPair(wl, PUMP, bandwidth=bw, shape=shape)
            a = coincidence_rate(disp(), ENV, f, 0.95, 1.0)
            return np.max(np.abs(a - coincidence_rate(disp(), ENV, f, 0.95, 1.0, passband_points=9)))

        assert err(250e-12) / err(500e-12) == pytest.approx(0.25, rel=0.05)

    def test_validation(self):
        f = FilterPair(PUMP, PUMP)
        with pytest.raises(DomainError):
            coincidence_rate(disp(), ENV, f, 1.2, 5000.0)
        with pytest.raises(DomainError):
            coincidence_rate(disp(), ENV, f, 0.9, 0.0)


class TestSingles:
    def test_peak(self):
        s, i = singles_rate(ENV, FilterPair(PUMP, PUMP), 1e5)
        assert (s, i) == (pytest.approx(1e5), pytest.approx(1e5))

    def test_proportional_to_envelope(self):
        dw = ENV.half_width_frequency
        ls = 2 * math.pi * C / (angular_frequency(PUMP) + dw)
        s, _ = singles_rate(ENV, FilterPair(ls, PUMP), 1e5)
        assert s == pytest.approx(0.5e5, rel=1e-9)

    def test_dark_counts(self):
        s, i = singles_rate(ENV, FilterPair(PUMP, PUMP), 1e5, NoiseSpec(0, 300))
        assert s == pytest.approx(1e5 + 300)


class TestNormalizationCancelsEnvelope:
    @pytest.mark.parametrize("shape", ["sinc2", "gaussian"])
    @pytest.mark.parametrize("fwhm", [20e-9, 60e-9])
    def test_envelope_free(self, shape, fwhm):
        wl = scan()
        env = PhaseMatchingEnvelope(fwhm=fwhm, shape=shape)
        f = FilterPair(wl, PUMP)
        c = coincidence_rate(disp(), env, f, 0.95, 5000.0, phi_off=0.4)
        s, i = singles_rate(env, f, 1e5)
        norm = c / np.sqrt(s * i) * 1e5 / 5000.0
        dw = detuning(wl, PUMP)
        # the idler sits at -dw; the sinc2/gaussian envelope is even so sqrt(s i) = E
        expected = 0.5 * (1 + 0.95 * np.cos(BETA2_EX * dw ** 2 * 0.9 + 0.4))
        assert np.max(np.abs(norm - expected)) <= 1e-12

    def test_even_in_detuning(self):
        d = disp()
        dw = np.linspace(1e11, 9e12, 50)
        w = 2 * math.pi * C
        w0 = angular_frequency(PUMP)
        plus = coincidence_rate(d, ENV, FilterPair(w / (w0 + dw)[::-1], PUMP), 0.9, 1.0)
        minus = coincidence_rate(d, ENV, FilterPair(w / (w0 - dw), PUMP), 0.9, 1.0)
        assert np.allclose(plus[::-1], minus, rtol=1e-12)


def test_per_branch_matches_pair_model_for_odd_orders():
    wl = scan()
    f = FilterPair(wl, PUMP)
    d = disp(extra=(6e-39,))
    sym = coincidence_rate(d, ENV, f, 0.95, 5000.0)
    full = coincidence_rate(d, ENV, f, 0.95, 5000.0, per_branch=True)
    # the only residue is the detuning asymmetry of the wavelength grid (rounding level)
    assert np.max(np.abs(full - sym)) < 1e-6
