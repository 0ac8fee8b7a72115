"""
Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error,
4 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import plotting
from .acquisition import run_scan
from .errors import DomainError, InsufficientDataError
from .estimator import fit_interferogram, normalize
from .io import (ConfigError, FormatError, dump_json, load_config, read_interferogram,
                 write_interferogram)
from .rates import NoiseSpec
from .rangemap import grid_axis, range_map, read_range_map, write_range_map
from .workflows import precision_run, pump_grid, sweep

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("qsagnac")


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _config(path):
    try:
        return load_config(path)
    except ConfigError as exc:
        raise CliError(EXIT_USAGE, f"invalid config: {exc}") from None
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read config: {exc}") from None


def _write(fn, *args):
    try:
        return fn(*args)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write output: {exc}") from None


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_USAGE, f"{path}: invalid JSON (line {exc.lineno})") from None


def cmd_simulate(args):
    cfg = _config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    model = cfg.source_model()
    if args.noiseless:
        model = replace(model, noise=NoiseSpec())
    raw = run_scan(cfg.dispersion(), model, cfg.scan_plan(seed=seed), noiseless=args.noiseless)
    side = _write(write_interferogram, raw, args.out)
    print(f"wrote {len(raw)} points to {args.out} (metadata {side})")
    return EXIT_OK


def _fringe_record(fringe):
    return {"signal_wavelength_m": fringe.signal_wavelength, "detuning_rad_s": fringe.detuning,
            "value": fringe.value, "sigma": fringe.sigma}


def cmd_fit(args):
    try:
        raw = read_interferogram(args.inp, pump=args.pump, length=args.length)
    except FormatError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {args.inp}: {exc}") from None
    if raw.length is None:
        raise CliError(EXIT_USAGE, "sample length unknown: no sidecar metadata, pass --length")
    convention = {"geometric": "geometric_mean", "single": "single_channel"}[args.convention]
    sign = args.sign
    if sign is None:
        truth = raw.truth or {}
        sign = 1 if truth.get("beta2_si", 1.0) < 0 else -1
    try:
        fringe = normalize(raw, convention)
        fit = fit_interferogram(raw, convention=convention, d_sign=sign)
    except (InsufficientDataError, DomainError) as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    out = fit.to_dict()
    out["convention"] = convention
    out["input"] = str(args.inp)
    out["fringe"] = _fringe_record(fringe)
    _write(dump_json, out, args.out)
    print(f"D = {fit.d_value:.6f} ± {fit.d_sigma:.6f} ps/(nm.km)")
    if not fit.converged:
        log.error("fit did not converge (%s, flags %s)", fit.termination, fit.flags)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_mc(args):
    if args.runs < 2:
        raise CliError(EXIT_USAGE, "--runs must be >= 2")
    cfg = _config(args.config)
    fits, st = precision_run(cfg, args.runs, workers=args.workers)
    good = np.array([f.d_value for f in fits if f.converged])
    counts, edges = np.histogram(good, bins=args.bins)
    out = Path(args.out)
    runs_csv = out.with_name(out.stem + "_runs.csv")
    result = {"kind": "mc_result", "stats": st.to_dict(), "truth_d_ps_nm_km": cfg.d_value(),
              "histogram": {"edges": edges, "counts": counts},
              "runs_csv": runs_csv.name, "config": cfg.to_dict()}
    _write(dump_json, result, out)

    def table():
        with runs_csv.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["run", "d_ps_nm_km", "d_sigma_ps_nm_km", "beta2_s2_per_m", "phi_off_rad",
                        "visibility", "chi2_reduced", "converged"])
            for k, f in enumerate(fits):
                w.writerow([k, repr(f.d_value), repr(f.d_sigma), repr(f.beta2), repr(f.phi_off),
                            repr(f.visibility), repr(f.chi2_reduced), int(f.converged)])

    _write(table)
    print(f"D = {st.mean_d:.6f} ± {st.std_d:.6f} ps/(nm.km) over {st.n} runs "
          f"(relative error {100 * st.relative_error:.2e} %)")
    return EXIT_OK if st.passed else EXIT_NUMERIC


def cmd_sweep(args):
    cfg = _config(args.config)
    try:
        pumps = pump_grid(args.start, args.stop, args.step)
    except DomainError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    if pumps.size < 3:
        raise CliError(EXIT_USAGE, "a sweep needs at least 3 pump wavelengths")
    try:
        tod = sweep(cfg, pumps, args.slope)
    except InsufficientDataError as exc:
        raise CliError(EXIT_NUMERIC, str(exc)) from None
    out = Path(args.out)
    result = tod.to_dict()
    result["generator_slope_ps_nm2_km"] = args.slope
    _write(dump_json, result, out)
    points_csv = out.with_name(out.stem + "_points.csv")

    def table():
        with points_csv.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["pump_m", "d_ps_nm_km", "d_sigma_ps_nm_km"])
            for p, f in tod.per_point:
                w.writerow([repr(p), repr(f.d_value), repr(f.d_sigma)])

    _write(table)
    print(f"TOD slope = {tod.slope:.5f} ± {tod.slope_uncertainty:.5f} ps/(nm2.km)")
    return EXIT_OK if len(tod.per_point) == pumps.size else EXIT_NUMERIC


def cmd_rangemap(args):
    if not (0 < args.lmin < args.lmax):
        raise CliError(EXIT_USAGE, "need 0 < --lmin < --lmax")
    if not args.dmin < args.dmax:
        raise CliError(EXIT_USAGE, "need --dmin < --dmax")
    try:
        lengths = grid_axis(args.lmin, args.lmax, args.n_lengths, "log")
        cds = grid_axis(args.dmin, args.dmax, args.n_cd, args.d_scale)
        grid = range_map(lengths, cds, args.pump, args.filter_bw, args.source_bw)
    except DomainError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    _write(write_range_map, grid, args.out)
    print(f"wrote {lengths.size} x {cds.size} range map to {args.out}")
    return EXIT_OK


_PLOT_KINDS = {"fringe": "fit_result", "histogram": "mc_result", "sweep": "tod_result"}


def cmd_plot(args):
    if args.kind == "rangemap":
        try:
            grid = read_range_map(args.inp)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot read {args.inp}: {exc}") from None
        except (ValueError, StopIteration):
            raise CliError(EXIT_USAGE, f"{args.inp} is not a range-map CSV") from None
        _write(plotting.plot_rangemap, grid, args.out)
        return EXIT_OK
    try:
        text = Path(args.inp).read_text()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {args.inp}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        raise CliError(EXIT_USAGE, f"{args.inp} does not match plot kind {args.kind!r}") from None
    if not isinstance(data, dict) or data.get("kind") != _PLOT_KINDS[args.kind]:
        raise CliError(EXIT_USAGE, f"{args.inp} does not match plot kind {args.kind!r}")
    if args.kind == "fringe" and "fringe" not in data:
        raise CliError(EXIT_USAGE, f"{args.inp} carries no fringe data")
    fn = {"fringe": plotting.plot_fringe, "histogram": plotting.plot_histogram,
          "sweep": plotting.plot_sweep}[args.kind]
    _write(fn, data, args.out)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="qsagnac", description=__doc__.splitlines()[1])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate one filter scan")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--noiseless", action="store_true",
                   help="record expected counts with no Poisson noise and no SBRS background")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fit", help="fit the dispersion of a recorded scan")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--convention", choices=("geometric", "single"), default="geometric")
    s.add_argument("--pump", type=float, help="pump wavelength [m] if no sidecar")
    s.add_argument("--length", type=float, help="sample length [m] if no sidecar")
    s.add_argument("--sign", type=int, choices=(-1, 1),
                   help="sign of D to report (default: from sidecar truth, else -1)")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("mc", help="Monte-Carlo precision ensemble")
    s.add_argument("--config", required=True)
    s.add_argument("--runs", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--bins", type=int, default=15)
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=cmd_mc)

    s = sub.add_parser("sweep", help="pump-wavelength sweep for the dispersion slope")
    s.add_argument("--config", required=True)
    s.add_argument("--start", type=float, required=True)
    s.add_argument("--stop", type=float, required=True)
    s.add_argument("--step", type=float, required=True)
    s.add_argument("--slope", type=float, default=0.0, help="generator slope [ps/(nm^2 km)]")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("rangemap", help="first-fringe width over (length, D)")
    s.add_argument("--lmin", type=float, required=True)
    s.add_argument("--lmax", type=float, required=True)
    s.add_argument("--dmin", type=float, required=True)
    s.add_argument("--dmax", type=float, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--pump", type=float, default=1560.6e-9)
    s.add_argument("--filter-bw", type=float, default=500e-12)
    s.add_argument("--source-bw", type=float, default=60e-9)
    s.add_argument("--n-lengths", type=int, default=61)
    s.add_argument("--n-cd", type=int, default=61)
    s.add_argument("--d-scale", choices=("auto", "lin", "log"), default="auto")
    s.set_defaults(func=cmd_rangemap)

    s = sub.add_parser("plot", help="render an SVG figure")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--kind", choices=("fringe", "histogram", "sweep", "rangemap"), required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
