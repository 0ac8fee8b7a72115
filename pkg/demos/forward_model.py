"""
The two-photon fringe and its envelope
======================================

Walk through the forward model: detuning, the quadratic pair phase, the
raw coincidence and singles rates, and the normalized fringe that the
estimator fits. Figures are written next to this script as SVG.
"""
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from qsagnac import (FilterPair, PhaseMatchingEnvelope, TaylorDispersion, coincidence_rate,
                     detuning, fringe_width, singles_rate)

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

###############################################################################
# A 0.9 m dispersion-shifted fiber with D = -81.654 ps/(nm km), pumped at
# 1560.6 nm. The signal filter is scanned, and the idler filter follows
# the energy-conserving partner wavelength.
pump = 1560.6e-9
fiber = TaylorDispersion.from_d(-81.654, pump, 0.9)
print(f"beta2 = {fiber.beta2:.5e} s^2/m")
print(f"first fringe width = {fringe_width(pump, fiber.beta2, 0.9).delta_lambda * 1e9:.3f} nm")

signal = np.linspace(pump - 24e-9, pump + 24e-9, 1201)
filters = FilterPair(signal, pump)
envelope = PhaseMatchingEnvelope(fwhm=60e-9)

###############################################################################
# Raw rates carry the phase-matching envelope; the singles carry the same
# envelope, so the ratio is the bare fringe 1/2 (1 + V cos(beta2 dw^2 L)).
coinc = coincidence_rate(fiber, envelope, filters, vis=0.95, peak_rate=5000.0)
s, i = singles_rate(envelope, filters, peak_singles=1e5)
normalized = coinc / np.sqrt(s * i) * 1e5 / 5000.0

dw = detuning(signal, pump)
analytic = 0.5 * (1 + 0.95 * np.cos(fiber.beta2 * dw ** 2 * 0.9))
print(f"max |normalized - analytic| = {np.max(np.abs(normalized - analytic)):.1e}")

fig, (a, b) = plt.subplots(2, 1, figsize=(5, 5), sharex=True)
a.plot(signal * 1e9, coinc, label="coincidences / s")
a.plot(signal * 1e9, s * 5000.0 / 1e5, "--", label="singles (scaled)")
a.legend()
b.plot(signal * 1e9, normalized)
b.set_xlabel("signal wavelength (nm)")
b.set_ylabel("normalized")
fig.tight_layout()
fig.savefig(out / "forward_model.svg")
