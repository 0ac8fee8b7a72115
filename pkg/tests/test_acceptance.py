"""
Acceptance suite: one test class per criterion.

Run on its own with ``pytest tests/test_acceptance.py``; a PASS/FAIL line
per criterion is printed in the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from qsagnac.acquisition import ScanPlan, SourceModel, mc_ensemble, poisson_counts, run_scan
from qsagnac.estimator import (fit_ensemble, fit_interferogram, fringe_jacobian, fringe_model,
                               normalize)
from qsagnac.io import RunConfig
from qsagnac.optics import (C, TaylorDispersion, angular_frequency, beta2_to_d, d_to_beta2,
                            fringe_width, wavelength_from_frequency)
from qsagnac.rangemap import grid_axis, range_map
from qsagnac.rates import NoiseSpec, PhaseMatchingEnvelope
from qsagnac.workflows import pump_grid, precision_run, sweep

PUMP = 1560.6e-9
D_TRUE = -81.654
LENGTH = 0.9
SLOPE = -0.26  # ps/(nm^2 km)

# mpmath evaluation of sqrt(lambda^4 / (2 pi c^2 |beta2| L)) at beta2 = 1.0558e-25, L = 0.9
FRINGE_ORACLE = 1.051381871730991205e-8


def config(**scan):
    cfg = RunConfig()
    for key, value in scan.items():
        setattr(cfg.scan, key, value)
    return cfg


def beta3_from_slope(d, slope, wl):
    """beta3 [s^3/m] from D [ps/(nm km)] and dD/dlambda [ps/(nm^2 km)] at ``wl``."""
    d_si = d * 1e-6
    s_si = slope * 1e3
    return wl ** 3 * (s_si * wl + 2 * d_si) / (2 * math.pi * C) ** 2


@pytest.mark.criterion(1)
class TestExactRecovery:
    def test_noiseless_paper_values(self):
        start = time.perf_counter()
        truth = TaylorDispersion.from_d(D_TRUE, PUMP, LENGTH)
        raw = run_scan(truth, SourceModel(), ScanPlan.centered(PUMP, span=48e-9), noiseless=True)
        fit = fit_interferogram(raw)
        elapsed = time.perf_counter() - start
        assert fit.converged
        assert abs(fit.d_value - D_TRUE) / abs(D_TRUE) <= 1e-6
        assert elapsed < 1.0


DWELLS = (0.25, 1.0, 4.0, 16.0)


@pytest.fixture(scope="module")
def precision():
    """100-run ensembles keyed by dwell, with the wall time of each."""
    out = {}
    for dwell in sorted({1.0, 32.0, *DWELLS}):
        start = time.perf_counter()
        fits, st = precision_run(config(dwell_s=dwell), runs=100)
        out[dwell] = (st, time.perf_counter() - start)
    return out


@pytest.mark.criterion(2)
class TestPrecisionProtocol:
    def test_defaults(self, precision):
        st, elapsed = precision[1.0]
        assert st.n == 100 and st.passed
        assert st.relative_error <= 5e-4
        assert abs(st.mean_d - D_TRUE) < 3 * st.std_d / math.sqrt(100)
        assert elapsed < 120

    def test_paper_level_precision(self, precision):
        assert precision[32.0][0].relative_error <= 7.3e-5

    def test_dwell_scaling(self, precision):
        rel = np.array([precision[d][0].relative_error for d in DWELLS])
        slope = np.polyfit(np.log(DWELLS), np.log(rel), 1)[0]
        assert slope == pytest.approx(-0.5, rel=0.2)
        # each point on the dwell^-1/2 line within 20 %
        norm = rel * np.sqrt(DWELLS)
        assert np.all(np.abs(norm / np.exp(np.log(norm).mean()) - 1) < 0.2)


@pytest.mark.criterion(3)
class TestTodProtocol:
    def test_sweep_recovery(self):
        start = time.perf_counter()
        pumps = pump_grid(1560.400e-9, 1560.800e-9, 100e-12)
        assert pumps.size == 5
        hits = 0
        for rep in range(20):
            cfg = config(dwell_s=256.0)
            cfg.seed = 1000 + rep
            tod = sweep(cfg, pumps, SLOPE)
            hits += abs(tod.slope - SLOPE) <= 0.05 * abs(SLOPE)
        assert hits >= 19
        assert time.perf_counter() - start < 180


@pytest.mark.criterion(4)
class TestDispersionCancellation:
    BETA3 = beta3_from_slope(D_TRUE, SLOPE, PUMP)

    def fit(self, beta3, noiseless):
        truth = TaylorDispersion.from_d(D_TRUE, PUMP, LENGTH, extra_orders=(beta3,), max_order=3)
        model = SourceModel(per_branch=True, noise=NoiseSpec(0.005, 500.0))
        raw = run_scan(truth, model, ScanPlan.centered(PUMP, span=48e-9, seed=21),
                       noiseless=noiseless)
        return fit_interferogram(raw)

    def test_beta3_scale(self):
        assert self.BETA3 == pytest.approx(-6.0959e-40, rel=1e-4)

    @pytest.mark.parametrize("noiseless", [True, False])
    @pytest.mark.parametrize("factor", [1.0, 10.0, -10.0])
    def test_beta2_unchanged(self, factor, noiseless):
        base = self.fit(0.0, noiseless)
        shifted = self.fit(factor * self.BETA3, noiseless)
        assert shifted.converged
        assert abs(shifted.beta2 - base.beta2) < shifted.beta2_sigma


@pytest.mark.criterion(5)
class TestWorkingRange:
    def test_paper_fringe_width(self):
        w = fringe_width(PUMP, 1.0558e-25, LENGTH).delta_lambda
        assert w == pytest.approx(FRINGE_ORACLE, rel=1e-12)
        assert w == pytest.approx(10.5e-9, rel=0.01)

    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_grid(self, sign):
        L = grid_axis(0.01, 1000, 61)
        D = sign * grid_axis(0.1, 200, 61)
        g = range_map(L, D)
        assert not np.any(np.isnan(g.width)) and np.all(np.isfinite(g.width))
        assert np.all(np.diff(g.width, axis=0) < 0)
        order = np.argsort(np.abs(D))
        assert np.all(np.diff(g.width[:, order], axis=1) < 0)
        # width ~ (|D| L)^-1/2
        k = g.width * np.sqrt(np.abs(D)[None, :] * L[:, None])
        assert np.allclose(k, k[0, 0], rtol=1e-12)
        g2 = range_map(100 * L[:3], D[:3])
        assert np.allclose(g2.width, g.width[:3, :3] / 10, rtol=1e-12)


@pytest.mark.criterion(6)
class TestNoiseRobustness:
    def test_sbrs_at_one_percent(self):
        truth = TaylorDispersion.from_d(D_TRUE, PUMP, LENGTH)
        plan = ScanPlan.centered(PUMP, span=48e-9, seed=33)
        clean = fit_ensemble(mc_ensemble(truth, SourceModel(noise=NoiseSpec()), plan, 20))
        noisy = fit_ensemble(mc_ensemble(truth, SourceModel(noise=NoiseSpec(0.01, 500.0)),
                                         plan, 20))
        for a, b in zip(clean, noisy):
            assert b.converged
            assert abs(b.d_value - a.d_value) < b.d_sigma
        shift = np.mean([b.d_value - a.d_value for a, b in zip(clean, noisy)])
        assert abs(shift) < np.mean([b.d_sigma for b in noisy])

    def test_noiseless_bias_below_sigma(self):
        truth = TaylorDispersion.from_d(D_TRUE, PUMP, LENGTH)
        plan = ScanPlan.centered(PUMP, span=48e-9)
        raw = run_scan(truth, SourceModel(noise=NoiseSpec(0.01, 500.0)), plan, noiseless=True)
        noisy = run_scan(truth, SourceModel(noise=NoiseSpec(0.01, 500.0)), plan)
        assert abs(fit_interferogram(raw).d_value - D_TRUE) < fit_interferogram(noisy).d_sigma


@pytest.mark.criterion(7)
class TestOracles:
    def test_unit_round_trips(self):
        wl = np.linspace(1.2e-6, 1.7e-6, 101)
        assert np.allclose(wavelength_from_frequency(angular_frequency(wl)), wl, rtol=1e-12, atol=0)
        for d in np.linspace(-200, 200, 81):
            for lam in (1.3e-6, PUMP, 1.65e-6):
                assert beta2_to_d(d_to_beta2(d, lam), lam) == pytest.approx(d, rel=1e-12, abs=1e-12)

    def test_jacobian(self):
        rng = np.random.default_rng(7)
        dw = np.linspace(-9e12, 9e12, 100)
        for _ in range(10):
            p = np.array([rng.uniform(-2e-25, 2e-25), rng.uniform(0, 2 * math.pi),
                          rng.uniform(0.1, 1.0), rng.uniform(0.5, 2.0)])
            J = fringe_jacobian(p, dw, LENGTH)
            for k in range(4):
                h = 1e-6 * abs(p[k])
                e = np.zeros(4)
                e[k] = h
                fd = (fringe_model(p + e, dw, LENGTH) - fringe_model(p - e, dw, LENGTH)) / (2 * h)
                assert np.max(np.abs(fd - J[:, k])) <= 1e-6 * np.max(np.abs(J[:, k]))

    def test_poisson_mean_variance(self):
        draws = poisson_counts(np.full(10_000, 5000.0), seed=2, run=0, channel=0)
        ratio = draws.mean() / draws.var(ddof=1)
        assert 0.95 <= ratio <= 1.05

    @pytest.mark.parametrize("shape", ["sinc2", "gaussian"])
    def test_normalization_removes_envelope(self, shape):
        truth = TaylorDispersion.from_d(D_TRUE, PUMP, LENGTH)
        plan = ScanPlan.centered(PUMP, span=48e-9)
        values = []
        for fwhm in (20e-9, 60e-9, 200e-9):
            model = SourceModel(envelope=PhaseMatchingEnvelope(fwhm=fwhm, shape=shape))
            fr = normalize(run_scan(truth, model, plan, noiseless=True))
            expected = 0.5 * (1 + 0.95 * np.cos(truth.beta2 * fr.detuning ** 2 * LENGTH))
            ratio = fr.value / expected
            assert np.max(np.abs(ratio - ratio[0])) <= 1e-12
            values.append(fr.value)
        assert np.max(np.abs(values[0] - values[2])) <= 1e-12
