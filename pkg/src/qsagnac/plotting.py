"""SVG figures for fits, ensembles, sweeps and range maps (byte-reproducible)."""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .estimator import fringe_model  # noqa: E402
from .optics import C  # noqa: E402
from .rangemap import ZONES  # noqa: E402

_RC = {"svg.hashsalt": "qsagnac", "svg.fonttype": "none", "font.size": 9}
_META = {"Date": None, "Creator": "qsagnac"}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)


def plot_fringe(fit: dict, path) -> None:
    """Normalized coincidences vs signal wavelength with the fitted curve."""
    fr = fit["fringe"]
    wl = np.asarray(fr["signal_wavelength_m"])
    pump = fit["pump_m"]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.errorbar(wl * 1e9, fr["value"], yerr=fr["sigma"], fmt="o", ms=3, color="tab:blue",
                    label="data")
        fine = np.linspace(wl.min(), wl.max(), 800)
        dw = 2 * math.pi * C * (1 / fine - 1 / pump)
        p = (fit["beta2_s2_per_m"], fit["phi_off_rad"], fit["visibility"], fit["amplitude"])
        ax.plot(fine * 1e9, fringe_model(p, dw, fit["length_m"]), color="tab:red",
                label=f"fit D = {fit['d_ps_nm_km']:.3f} ps/(nm km)")
        ax.set_xlabel("signal wavelength (nm)")
        ax.set_ylabel("normalized coincidences")
        ax.legend(loc="lower left")
        _save(fig, path)


def plot_histogram(mc: dict, path) -> None:
    """Histogram of fitted D over the ensemble with a normal curve."""
    h = mc["histogram"]
    edges = np.asarray(h["edges"])
    counts = np.asarray(h["counts"])
    st = mc["stats"]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.stairs(counts, edges, fill=True, color="tab:blue", alpha=0.6)
        mu, sd = st["mean_d_ps_nm_km"], st["std_d_ps_nm_km"]
        if sd and sd > 0:
            x = np.linspace(edges[0], edges[-1], 400)
            pdf = np.exp(-0.5 * ((x - mu) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
            ax.plot(x, pdf * counts.sum() * (edges[1] - edges[0]), color="tab:red")
        ax.set_xlabel("D (ps/(nm km))")
        ax.set_ylabel("runs")
        ax.set_title(f"n = {st['n']}, rel. error = {st['relative_error']:.2e}")
        _save(fig, path)


def plot_sweep(tod: dict, path) -> None:
    """D against pump wavelength with the fitted straight line."""
    pts = tod["per_point"]
    lam = np.array([p["pump_m"] for p in pts]) * 1e9
    d = np.array([p["d_ps_nm_km"] for p in pts])
    sd = np.array([p["d_sigma_ps_nm_km"] or 0.0 for p in pts])
    ref = tod["reference_wavelength_m"] * 1e9
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.errorbar(lam, d, yerr=sd, fmt="o", color="tab:blue")
        x = np.linspace(lam.min(), lam.max(), 50)
        ax.plot(x, tod["intercept_d_ps_nm_km"] + tod["slope_ps_nm2_km"] * (x - ref),
                color="tab:red",
                label=f"slope {tod['slope_ps_nm2_km']:.3f} ± {tod['slope_uncertainty_ps_nm2_km']:.3f}")
        ax.set_xlabel("pump wavelength (nm)")
        ax.set_ylabel("D (ps/(nm km))")
        ax.legend()
        _save(fig, path)


def plot_rangemap(grid, path) -> None:
    """Zone map over (length, |D|) with fringe-width contours."""
    L = grid.lengths
    D = grid.cd_values
    code = np.vectorize(lambda z: ZONES.index(z) if z in ZONES else -1)(grid.zone).astype(float)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.6))
        cmap = matplotlib.colors.ListedColormap(["gold", "darkorange", "salmon", "firebrick"])
        one_sign = bool(np.all(D > 0) or np.all(D < 0))
        y = np.abs(D) if one_sign else D
        order = np.argsort(y)
        y, code, width = y[order], code[:, order], grid.width[:, order]
        ax.pcolormesh(L, y, code.T, cmap=cmap, vmin=-0.5, vmax=3.5, shading="nearest")
        ax.set_xscale("log")
        if one_sign:
            w = width * 1e9
            cs = ax.contour(L, y, w.T, levels=[1, 2, 5, 10, 20, 50], colors="k",
                            linewidths=0.6)
            ax.clabel(cs, fmt="%g nm")
            ax.set_yscale("log")
        ax.set_xlabel("sample length (m)")
        ax.set_ylabel("|D| (ps/(nm km))" if one_sign else "D (ps/(nm km))")
        _save(fig, path)
