"""
Dispersion estimation from normalized coincidence interferograms.

The fitted model is ``A/2 * (1 + V cos(beta2 * dw^2 * L + phi_off))``.
``fit_cd`` seeds a damped least-squares refinement from a coarse grid
over beta2 in which, for every candidate, the offset phase, visibility
and amplitude are solved linearly (the fringe is linear in
``1, cos, sin`` of the quadratic phase).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .acquisition import Interferogram
from .errors import (DomainError, InsufficientDataError, PumpMismatchError,
                     RankDeficiencyError)
from .optics import _as_wavelength, beta2_to_d, d_to_beta2, detuning

log = logging.getLogger(__name__)

MIN_POINTS = 8
PARAM_NAMES = ("beta2", "phi_off", "visibility", "amplitude")


@dataclass
class NormalizedFringe:
    detuning: np.ndarray
    value: np.ndarray
    sigma: np.ndarray
    signal_wavelength: np.ndarray
    pump: float
    length: float | None = None
    n_dropped: int = 0

    def __len__(self):
        return len(self.value)


def normalize(raw: Interferogram, convention: str = "geometric_mean") -> NormalizedFringe:
    """Divide coincidences by the singles to remove the source envelope.

    ``geometric_mean`` divides by sqrt(S_s S_i); ``single_channel`` by
    S_s alone. The ratio is rescaled so its largest value is 1. Errors
    follow first-order Poisson propagation; a zero coincidence count is
    given a one-count floor. Points with a zero singles count are dropped.
    """
    C = np.asarray(raw.coincidences, dtype=float)
    Ss = np.asarray(raw.singles_s, dtype=float)
    Si = np.asarray(raw.singles_i, dtype=float)
    if convention == "geometric_mean":
        keep = (Ss > 0) & (Si > 0)
    elif convention == "single_channel":
        keep = Ss > 0
    else:
        raise DomainError(f"unknown normalization convention {convention!r}")
    n_dropped = int(np.count_nonzero(~keep))
    if np.count_nonzero(keep) < MIN_POINTS:
        raise InsufficientDataError(
            f"only {np.count_nonzero(keep)} usable points, need {MIN_POINTS}")
    C, Ss, Si = C[keep], Ss[keep], Si[keep]
    if convention == "geometric_mean":
        N = np.sqrt(Ss * Si)
        relvar_n = 0.25 * (1.0 / Ss + 1.0 / Si)
    else:
        N = Ss
        relvar_n = 1.0 / Ss
    value = C / N
    var_c = np.where(C > 0, C, 1.0)
    sigma = np.sqrt(var_c / N ** 2 + value ** 2 * relvar_n)
    scale = value.max()
    if not scale > 0:
        raise InsufficientDataError("no coincidences recorded")
    wl = np.asarray(raw.signal_wavelength, dtype=float)[keep]
    return NormalizedFringe(detuning=np.atleast_1d(detuning(wl, raw.pump)),
                            value=value / scale, sigma=sigma / scale,
                            signal_wavelength=wl, pump=raw.pump, length=raw.length,
                            n_dropped=n_dropped)


def fringe_model(params, dw, length):
    """Model value for physical ``params = (beta2, phi_off, V, A)``."""
    beta2, phi, vis, amp = params
    psi = beta2 * np.asarray(dw) ** 2 * length + phi
    return 0.5 * amp * (1.0 + vis * np.cos(psi))


def fringe_jacobian(params, dw, length):
    """Analytic d(model)/d(beta2, phi_off, V, A), shape (n, 4)."""
    beta2, phi, vis, amp = params
    dw2 = np.asarray(dw) ** 2
    psi = beta2 * dw2 * length + phi
    s, c = np.sin(psi), np.cos(psi)
    return np.column_stack([-0.5 * amp * vis * s * dw2 * length,
                            -0.5 * amp * vis * s,
                            0.5 * amp * c,
                            0.5 * (1.0 + vis * c)])


@dataclass
class FitResult:
    d_value: float
    beta2: float
    phi_off: float
    visibility: float
    amplitude: float
    covariance: np.ndarray
    chi2_reduced: float
    converged: bool
    n_iterations: int
    pump: float
    length: float
    d_sigma: float = float("nan")
    n_points: int = 0
    termination: str = ""
    flags: list = field(default_factory=list)

    @property
    def beta2_sigma(self) -> float:
        return float(math.sqrt(self.covariance[0, 0])) if self.covariance[0, 0] >= 0 else math.nan

    def to_dict(self) -> dict:
        return {
            "kind": "fit_result",
            "d_ps_nm_km": self.d_value,
            "d_sigma_ps_nm_km": self.d_sigma,
            "beta2_s2_per_m": self.beta2,
            "beta2_sigma_s2_per_m": self.beta2_sigma,
            "phi_off_rad": self.phi_off,
            "visibility": self.visibility,
            "amplitude": self.amplitude,
            "covariance": {"order": list(PARAM_NAMES),
                           "matrix": np.asarray(self.covariance).tolist()},
            "chi2_reduced": self.chi2_reduced,
            "converged": self.converged,
            "n_iterations": self.n_iterations,
            "termination": self.termination,
            "n_points": self.n_points,
            "pump_m": self.pump,
            "pump_nm": self.pump * 1e9,
            "length_m": self.length,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        return cls(d_value=d["d_ps_nm_km"], beta2=d["beta2_s2_per_m"], phi_off=d["phi_off_rad"],
                   visibility=d["visibility"], amplitude=d["amplitude"],
                   covariance=np.array(d["covariance"]["matrix"], dtype=float),
                   chi2_reduced=d["chi2_reduced"], converged=d["converged"],
                   n_iterations=d["n_iterations"], pump=d["pump_m"], length=d["length_m"],
                   d_sigma=d["d_sigma_ps_nm_km"], n_points=d.get("n_points", 0),
                   termination=d.get("termination", ""), flags=list(d.get("flags", [])))


def _grid_seed(u, y, sigma, theta_max, step=0.2, chunk=2048):
    """Best (theta_edge, phi, V, A) over a grid in the edge phase theta_edge >= 0."""
    n_grid = int(math.ceil(theta_max / step)) + 1
    grid = np.linspace(0.0, theta_max, n_grid)
    w = 1.0 / sigma
    yw = y * w
    best = (math.inf, None)
    for start in range(0, n_grid, chunk):
        th = grid[start:start + chunk, None]
        psi = th * u[None, :]
        X = np.stack([np.broadcast_to(w, psi.shape), np.cos(psi) * w, np.sin(psi) * w], axis=-1)
        XtX = np.einsum("gni,gnj->gij", X, X)
        Xty = np.einsum("gni,n->gi", X, yw)
        try:
            coef = np.linalg.solve(XtX, Xty[..., None])[..., 0]
        except np.linalg.LinAlgError:
            coef = np.stack([np.linalg.lstsq(a, b, rcond=None)[0] for a, b in zip(XtX, Xty)])
        resid = yw[None, :] - np.einsum("gni,gi->gn", X, coef)
        chi2 = np.einsum("gn,gn->g", resid, resid)
        k = int(np.argmin(chi2))
        if chi2[k] < best[0]:
            best = (chi2[k], (float(th[k, 0]), coef[k], start + k == n_grid - 1))
    theta, (a, b, c), at_edge = best[1]
    amp = 2.0 * a
    vis = math.hypot(b, c) / a if a != 0 else 0.0
    phi = math.atan2(-c, b)
    return np.array([theta, phi, vis, amp]), at_edge


def _lm(q, u, y, sigma, max_iter=200, gtol=1e-10, xtol=1e-14, ftol=1e-15):
    """Damped least squares in the scaled parameters (theta_edge, phi, V, A)."""

    def resid_jac(p):
        model = fringe_model(p, np.sqrt(u), 1.0)
        J = fringe_jacobian(p, np.sqrt(u), 1.0)
        return (model - y) / sigma, J / sigma[:, None]

    r, J = resid_jac(q)
    chi2 = float(r @ r)
    mu, nu = None, 2.0
    reason = "max_iter"
    it = 0
    for it in range(1, max_iter + 1):
        g = J.T @ r
        A = J.T @ J
        diag = np.maximum(np.diag(A), 1e-300)
        rnorm = math.sqrt(chi2)
        if rnorm == 0.0:
            reason = "zero_residual"
            break
        cosine = np.abs(g) / (np.sqrt(diag) * rnorm)
        if cosine.max() <= gtol:
            reason = "gtol"
            break
        if mu is None:
            mu = 1e-3 * diag.max()
        step = np.linalg.solve(A + mu * np.diag(diag), -g)
        scale = np.sqrt(diag)
        if np.linalg.norm(scale * step) <= xtol * (np.linalg.norm(scale * q) + xtol):
            reason = "xtol"
            break
        q_new = q + step
        r_new, J_new = resid_jac(q_new)
        chi2_new = float(r_new @ r_new)
        predicted = -(step @ g) * 2.0 - step @ A @ step
        actual = chi2 - chi2_new
        rho = actual / predicted if predicted > 0 else -1.0
        if rho > 0:
            q, r, J = q_new, r_new, J_new
            chi2_old, chi2 = chi2, chi2_new
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
            nu = 2.0
            if actual <= ftol * chi2_old and predicted <= ftol * chi2_old:
                reason = "ftol"
                break
        else:
            mu *= nu
            nu *= 2.0
            if mu > 1e300:
                reason = "stalled"
                break
    else:
        it = max_iter
    return q, chi2, J, it, reason


def fit_cd(fringe: NormalizedFringe, sut_length: float, pump=None, init="auto",
           d_sign: int = -1, d_range: float = 200.0) -> FitResult:
    """Fit beta2 (and offset, visibility, amplitude) to a normalized fringe.

    ``init`` is ``"auto"`` (grid over |D| <= ``d_range`` ps/(nm km)) or an
    explicit ``(beta2, phi_off)`` pair. The fringe is unchanged by
    ``(beta2, phi_off) -> (-beta2, -phi_off)``, so the data cannot fix the
    sign of the dispersion; ``d_sign`` selects the reported branch (-1:
    D < 0, the normal-dispersion side). An explicit init overrides it.
    """
    if not sut_length > 0:
        raise DomainError("sut_length must be > 0")
    pump = fringe.pump if pump is None else float(_as_wavelength(pump))
    dw = np.asarray(fringe.detuning, dtype=float)
    y = np.asarray(fringe.value, dtype=float)
    sigma = np.asarray(fringe.sigma, dtype=float)
    if len(y) < MIN_POINTS:
        raise InsufficientDataError(f"need at least {MIN_POINTS} points")
    if np.any(~(sigma > 0)):
        raise DomainError("all sigma must be > 0")
    omega = float(np.max(np.abs(dw)))
    if omega == 0.0:
        raise InsufficientDataError("scan has no detuning range")
    u = (dw / omega) ** 2
    to_theta = sut_length * omega ** 2  # beta2 -> edge phase
    flags = []

    if isinstance(init, str):
        if init != "auto":
            raise DomainError(f"unknown init {init!r}")
        theta_max = abs(d_to_beta2(d_range, pump)) * to_theta
        q0, at_edge = _grid_seed(u, y, sigma, theta_max)
        if at_edge:
            flags.append("grid_boundary")
    else:
        beta2_0, phi_0 = init
        d_sign = -1 if beta2_0 >= 0 else 1
        w = 1.0 / sigma
        psi = beta2_0 * to_theta * u + phi_0
        X = np.column_stack([w, np.cos(psi) * w])
        (a, b), *_ = np.linalg.lstsq(X, y * w, rcond=None)
        q0 = np.array([beta2_0 * to_theta, phi_0, b / a if a else 0.5, 2.0 * a])

    q, chi2, J, n_iter, reason = _lm(q0, u, y, sigma)
    theta, phi, vis, amp = q
    if vis < 0:
        vis, phi = -vis, phi + math.pi
    beta2 = theta / to_theta
    T = np.diag([1.0 / to_theta, 1.0, 1.0, 1.0])
    dof = max(len(y) - 4, 1)

    JtJ = J.T @ J
    identifiable = True
    try:
        cond = np.linalg.cond(JtJ)
        if not np.isfinite(cond) or cond > 1e14:
            raise np.linalg.LinAlgError
        cov_q = np.linalg.inv(JtJ)
    except np.linalg.LinAlgError:
        identifiable = False
        cov_q = np.linalg.pinv(JtJ)
    cov = T @ cov_q @ T
    sigma_v = math.sqrt(cov[2, 2]) if np.isfinite(cov[2, 2]) else math.inf
    if identifiable and vis < 3.0 * sigma_v:
        identifiable = False
    if not identifiable:
        flags.append("unidentifiable")
        cov[0, 0] = cov[1, 1] = math.inf

    # fold onto the requested dispersion-sign branch
    d_now = beta2_to_d(beta2, pump)
    if d_now != 0 and np.sign(d_now) != np.sign(d_sign):
        beta2, phi = -beta2, -phi
        F = np.diag([-1.0, -1.0, 1.0, 1.0])
        cov = F @ cov @ F
    d_value = beta2_to_d(beta2, pump)
    if abs(d_value) >= d_range:
        flags.append("d_beyond_grid")
    if vis > 1.05:
        flags.append("visibility_overshoot")
    dd_db2 = abs(beta2_to_d(1.0, pump))
    d_sigma = math.sqrt(cov[0, 0]) * dd_db2 if cov[0, 0] >= 0 else math.nan

    converged = reason in ("gtol", "xtol", "ftol", "zero_residual") and identifiable
    if converged:
        eig = np.linalg.eigvalsh(0.5 * (cov + cov.T))
        if eig.min() < -1e-12 * max(abs(eig.max()), 1e-300):
            converged = False
            flags.append("covariance_not_psd")
    return FitResult(d_value=float(d_value), beta2=float(beta2),
                     phi_off=float(phi % (2.0 * math.pi)), visibility=float(vis),
                     amplitude=float(amp), covariance=cov, chi2_reduced=chi2 / dof,
                     converged=bool(converged), n_iterations=n_iter, pump=pump,
                     length=float(sut_length), d_sigma=float(d_sigma), n_points=len(y),
                     termination=reason, flags=flags)


def fit_interferogram(raw: Interferogram, sut_length: float | None = None,
                      convention: str = "geometric_mean", **kwargs) -> FitResult:
    """normalize + fit_cd with the length taken from the record when not given."""
    fringe = normalize(raw, convention)
    length = sut_length if sut_length is not None else raw.length
    if length is None:
        raise DomainError("sample length unknown; pass sut_length")
    return fit_cd(fringe, length, raw.pump, **kwargs)


@dataclass
class EnsembleStats:
    mean_d: float
    std_d: float
    relative_error: float
    n: int
    normality_pvalue: float | None
    n_excluded: int = 0

    @property
    def excluded_fraction(self) -> float:
        return self.n_excluded / (self.n + self.n_excluded)

    @property
    def passed(self) -> bool:
        """At most 5 % of the runs failed to converge."""
        return self.excluded_fraction <= 0.05

    @property
    def normal_warning(self) -> bool:
        return self.normality_pvalue is not None and self.normality_pvalue < 0.01

    def to_dict(self) -> dict:
        return {"kind": "ensemble_stats", "mean_d_ps_nm_km": self.mean_d,
                "std_d_ps_nm_km": self.std_d, "relative_error": self.relative_error,
                "relative_error_percent": 100.0 * self.relative_error, "n": self.n,
                "n_excluded": self.n_excluded, "normality_pvalue": self.normality_pvalue,
                "passed": self.passed}


def ensemble_stats(fits) -> EnsembleStats:
    """Mean, spread and normality of the D values of the converged fits."""
    fits = list(fits)
    good = np.array([f.d_value for f in fits if f.converged], dtype=float)
    n_excluded = len(fits) - len(good)
    if len(good) < 2:
        raise InsufficientDataError(f"{len(good)} converged fits, need at least 2")
    if np.ptp(good) == 0:
        mean, std = float(good[0]), 0.0
    else:
        mean, std = float(good.mean()), float(good.std(ddof=1))
    pvalue = None
    if len(good) >= 3 and std > 0:
        pvalue = float(stats.shapiro(good).pvalue)
    result = EnsembleStats(mean, std, std / abs(mean) if mean != 0 else math.inf,
                           len(good), pvalue, n_excluded)
    if result.normal_warning:
        log.warning("D distribution departs from normal (Shapiro p = %.3g)", pvalue)
    if not result.passed:
        log.warning("%d of %d fits did not converge", n_excluded, len(fits))
    return result


@dataclass
class TodResult:
    slope: float  # ps/(nm^2 km)
    intercept_d: float  # ps/(nm km) at reference_wavelength
    slope_uncertainty: float
    reference_wavelength: float
    intercept_uncertainty: float
    chi2_reduced: float
    per_point: list

    def to_dict(self) -> dict:
        return {
            "kind": "tod_result",
            "slope_ps_nm2_km": self.slope,
            "slope_uncertainty_ps_nm2_km": self.slope_uncertainty,
            "slope_s_per_m3": self.slope * 1e-12 / (1e-18 * 1e3),
            "intercept_d_ps_nm_km": self.intercept_d,
            "intercept_uncertainty_ps_nm_km": self.intercept_uncertainty,
            "reference_wavelength_m": self.reference_wavelength,
            "chi2_reduced": self.chi2_reduced,
            "per_point": [{"pump_m": p, **f.to_dict()} for p, f in self.per_point],
        }


def fit_tod(sweep, reference_wavelength: float | None = None) -> TodResult:
    """Weighted straight-line fit of D against pump wavelength.

    ``sweep`` holds ``(pump, FitResult)`` pairs; each point is weighted by
    the inverse variance of its D. If any fit has no finite positive
    uncertainty the regression is unweighted and the errors come from the
    residual scatter instead.
    """
    pts = sorted(((float(_as_wavelength(p)), f) for p, f in sweep), key=lambda t: t[0])
    pts = [(p, f) for p, f in pts if f.converged]
    if len(pts) < 2:
        raise InsufficientDataError("need at least 2 converged pump points")
    lam = np.array([p for p, _ in pts])
    if np.ptp(lam) == 0:
        raise RankDeficiencyError("all pump wavelengths are identical")
    ref = float(lam.mean()) if reference_wavelength is None else float(reference_wavelength)
    x = (lam - ref) * 1e9  # nm
    y = np.array([f.d_value for _, f in pts])
    sig = np.array([f.d_sigma for _, f in pts])
    weighted = bool(np.all(np.isfinite(sig) & (sig > 0)))
    w = 1.0 / sig ** 2 if weighted else np.ones_like(y)
    X = np.column_stack([np.ones_like(x), x])
    XtW = X.T * w
    cov = np.linalg.inv(XtW @ X)
    coef = cov @ (XtW @ y)
    resid = y - X @ coef
    dof = len(y) - 2
    chi2_red = float((w * resid ** 2).sum() / dof) if dof > 0 else 0.0
    if not weighted:
        cov = cov * chi2_red if dof > 0 else cov * 0.0
    return TodResult(slope=float(coef[1]), intercept_d=float(coef[0]),
                     slope_uncertainty=float(math.sqrt(cov[1, 1])),
                     reference_wavelength=ref,
                     intercept_uncertainty=float(math.sqrt(cov[0, 0])),
                     chi2_reduced=chi2_red, per_point=pts)


def subtract_reference(sample_fit: FitResult, reference_fit: FitResult) -> FitResult:
    """Sample minus reference D (e.g. the loop without the sample), variances summed."""
    if not (sample_fit.converged and reference_fit.converged):
        raise DomainError("both fits must have converged")
    if abs(sample_fit.pump - reference_fit.pump) > 1e-12:
        raise PumpMismatchError(
            f"pump wavelengths differ by {abs(sample_fit.pump - reference_fit.pump) * 1e12:.3f} pm")
    cov = np.asarray(sample_fit.covariance) + np.asarray(reference_fit.covariance)
    return FitResult(d_value=sample_fit.d_value - reference_fit.d_value,
                     beta2=sample_fit.beta2 - reference_fit.beta2,
                     phi_off=sample_fit.phi_off, visibility=sample_fit.visibility,
                     amplitude=sample_fit.amplitude, covariance=cov,
                     chi2_reduced=sample_fit.chi2_reduced, converged=True,
                     n_iterations=sample_fit.n_iterations, pump=sample_fit.pump,
                     length=sample_fit.length,
                     d_sigma=math.hypot(sample_fit.d_sigma, reference_fit.d_sigma),
                     n_points=sample_fit.n_points, termination="difference",
                     flags=sorted(set(sample_fit.flags) | set(reference_fit.flags) | {"difference"}))


def fit_ensemble(interferograms, sut_length=None, convention="geometric_mean", **kwargs):
    return [fit_interferogram(r, sut_length, convention, **kwargs) for r in interferograms]
