"""
Run configuration and file interchange (interferogram CSV + JSON sidecar).

Config files are JSON with units in the field names. Validation errors
name the offending field path and, when it can be located, the line of
the config file it sits on.
"""
from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .acquisition import Interferogram, ScanPlan, SourceModel
from .optics import TaylorDispersion, angular_frequency, beta2_to_d, d_to_beta2
from .rates import NoiseSpec, PhaseMatchingEnvelope

CSV_HEADER = ["lambda_s_m", "lambda_i_m", "coincidences", "singles_s", "singles_i"]


class ConfigError(ValueError):
    def __init__(self, path: str, message: str, line: int | None = None):
        self.path, self.line = path, line
        where = f" (line {line})" if line else ""
        super().__init__(f"{path}{where}: {message}")


class FormatError(ValueError):
    """A data file does not follow its documented layout."""


@dataclass
class SutConfig:
    length_m: float = 0.9
    d_ps_nm_km: float | None = -81.654
    beta2_si: float | None = None
    phi_off_rad: float = 0.0


@dataclass
class EnvelopeConfig:
    fwhm_m: float = 60e-9
    shape: str = "sinc2"


@dataclass
class FilterConfig:
    bandwidth_m: float = 500e-12
    shape: str = "rectangular"


@dataclass
class NoiseConfig:
    sbrs_fraction: float = 0.005
    sbrs_singles_cps: float = 500.0


@dataclass
class ScanConfig:
    n_points: int = 100
    span_m: float = 48e-9
    dwell_s: float = 1.0
    peak_coinc_cps: float = 5000.0
    peak_singles_cps: float = 100_000.0


@dataclass
class RunConfig:
    pump_m: float = 1560.6e-9
    sut: SutConfig = field(default_factory=SutConfig)
    envelope: EnvelopeConfig = field(default_factory=EnvelopeConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    visibility: float = 0.95
    seed: int = 1

    # -- derived objects -------------------------------------------------
    def beta2(self, pump: float | None = None) -> float:
        pump = self.pump_m if pump is None else pump
        if self.sut.beta2_si is not None:
            return self.sut.beta2_si
        return d_to_beta2(self.sut.d_ps_nm_km, pump)

    def d_value(self) -> float:
        if self.sut.d_ps_nm_km is not None:
            return self.sut.d_ps_nm_km
        return beta2_to_d(self.sut.beta2_si, self.pump_m)

    def dispersion(self, d_override: float | None = None, pump: float | None = None):
        pump = self.pump_m if pump is None else pump
        if d_override is not None:
            return TaylorDispersion.from_d(d_override, pump, self.sut.length_m)
        return TaylorDispersion(float(angular_frequency(pump)), (0.0, 0.0, self.beta2(pump)),
                                self.sut.length_m)

    def source_model(self, pump: float | None = None) -> SourceModel:
        pump = self.pump_m if pump is None else pump
        env = PhaseMatchingEnvelope(pump, self.envelope.fwhm_m, self.envelope.shape)
        return SourceModel(envelope=env, filter_bandwidth=self.filter.bandwidth_m,
                           filter_shape=self.filter.shape, visibility=self.visibility,
                           phi_off=self.sut.phi_off_rad,
                           noise=NoiseSpec(self.noise.sbrs_fraction, self.noise.sbrs_singles_cps))

    def scan_plan(self, pump: float | None = None, seed: int | None = None) -> ScanPlan:
        pump = self.pump_m if pump is None else pump
        s = self.scan
        return ScanPlan.centered(pump, s.n_points, s.span_m, dwell=s.dwell_s,
                                 peak_coincidence_rate=s.peak_coinc_cps,
                                 peak_singles_rate=s.peak_singles_cps,
                                 seed=self.seed if seed is None else seed)

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {"sut": SutConfig, "envelope": EnvelopeConfig, "filter": FilterConfig,
             "noise": NoiseConfig, "scan": ScanConfig}


def _line_of(text: str | None, path: str) -> int | None:
    """Best-effort line number of the last key of a dotted ``path``."""
    if not text:
        return None
    lines = text.splitlines()
    start = 0
    for key in path.split("."):
        pat = re.compile(r'"%s"\s*:' % re.escape(key))
        for n in range(start, len(lines)):
            if pat.search(lines[n]):
                start = n
                break
        else:
            return None
    return start + 1


def _number(value, path, text, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}", _line_of(text, path))
    if integer and not (isinstance(value, int) or float(value).is_integer()):
        raise ConfigError(path, f"expected an integer, got {value!r}", _line_of(text, path))
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite", _line_of(text, path))
    return int(value) if integer else float(value)


def config_from_dict(data: dict, text: str | None = None) -> RunConfig:
    """Build and validate a RunConfig; missing fields take their defaults."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    top = {f.name for f in fields(RunConfig)}
    for key in data:
        if key not in top:
            raise ConfigError(key, "unknown field", _line_of(text, key))
    cfg = RunConfig()
    for name, cls in _SECTIONS.items():
        section = data.get(name, {})
        if not isinstance(section, dict):
            raise ConfigError(name, "expected an object", _line_of(text, name))
        known = {f.name: f for f in fields(cls)}
        for key in section:
            if key not in known:
                raise ConfigError(f"{name}.{key}", "unknown field", _line_of(text, f"{name}.{key}"))
        obj = getattr(cfg, name)
        for key, value in section.items():
            path = f"{name}.{key}"
            if key == "shape":
                if not isinstance(value, str):
                    raise ConfigError(path, "expected a string", _line_of(text, path))
                setattr(obj, key, value)
            elif value is None and key in ("d_ps_nm_km", "beta2_si"):
                setattr(obj, key, None)
            else:
                setattr(obj, key, _number(value, path, text, integer=(key == "n_points")))
    if "sut" in data and ("d_ps_nm_km" in data["sut"]) != ("beta2_si" in data["sut"]):
        # only one given explicitly: drop the default of the other
        if "beta2_si" in data["sut"]:
            cfg.sut.d_ps_nm_km = None
        else:
            cfg.sut.beta2_si = None
    for key in ("pump_m", "visibility"):
        if key in data:
            setattr(cfg, key, _number(data[key], key, text))
    if "seed" in data:
        cfg.seed = _number(data["seed"], "seed", text, integer=True)
    validate(cfg, text)
    return cfg


def validate(cfg: RunConfig, text: str | None = None) -> RunConfig:
    def fail(path, msg):
        raise ConfigError(path, msg, _line_of(text, path))

    if not cfg.pump_m > 0:
        fail("pump_m", "must be > 0")
    if not cfg.sut.length_m > 0:
        fail("sut.length_m", "must be > 0")
    if (cfg.sut.d_ps_nm_km is None) == (cfg.sut.beta2_si is None):
        fail("sut", "exactly one of d_ps_nm_km / beta2_si must be given")
    if cfg.envelope.shape not in ("sinc2", "gaussian"):
        fail("envelope.shape", "must be 'sinc2' or 'gaussian'")
    if not cfg.envelope.fwhm_m > 0:
        fail("envelope.fwhm_m", "must be > 0")
    if cfg.filter.shape not in ("rectangular", "gaussian"):
        fail("filter.shape", "must be 'rectangular' or 'gaussian'")
    if not cfg.filter.bandwidth_m > 0:
        fail("filter.bandwidth_m", "must be > 0")
    if cfg.noise.sbrs_fraction < 0:
        fail("noise.sbrs_fraction", "must be >= 0")
    if cfg.noise.sbrs_singles_cps < 0:
        fail("noise.sbrs_singles_cps", "must be >= 0")
    s = cfg.scan
    if s.n_points < 8:
        fail("scan.n_points", "must be >= 8")
    if not s.span_m > 0:
        fail("scan.span_m", "must be > 0")
    if s.span_m / 2 >= cfg.pump_m:
        fail("scan.span_m", "scan reaches the energy-conservation pole")
    for key in ("dwell_s", "peak_coinc_cps", "peak_singles_cps"):
        if not getattr(s, key) > 0:
            fail(f"scan.{key}", "must be > 0")
    if not 0.0 <= cfg.visibility <= 1.0:
        fail("visibility", "must lie in [0, 1]")
    if cfg.seed < 0:
        fail("seed", "must be >= 0")
    return cfg


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc.msg}", exc.lineno) from None
    return config_from_dict(data, text)


def save_config(cfg: RunConfig, path) -> None:
    dump_json(cfg.to_dict(), path)


# -- JSON ------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(obj, path) -> None:
    """Write ``obj`` as JSON; non-finite floats become null."""
    Path(path).write_text(json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n")


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


# -- interferogram ---------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(int(x))


def write_interferogram(raw: Interferogram, path) -> Path:
    """CSV of the scan plus a JSON sidecar with pump, dwell, seed and truth."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for row in zip(raw.signal_wavelength, raw.idler_wavelength, raw.coincidences,
                       raw.singles_s, raw.singles_i):
            w.writerow([_fmt(v) for v in row])
    meta = {"pump_m": raw.pump, "dwell_s": raw.dwell, "seed": raw.seed, "run": raw.run,
            "length_m": raw.length, "warnings": raw.warnings}
    if raw.truth is not None:
        meta["truth"] = raw.truth
    side = sidecar_path(path)
    dump_json(meta, side)
    return side


def _count(text: str):
    v = float(text)
    return int(v) if v.is_integer() and "." not in text and "e" not in text.lower() else v


def read_interferogram(path, pump: float | None = None, length: float | None = None,
                       dwell: float | None = None) -> Interferogram:
    """Read a scan CSV and, when present, its sidecar metadata.

    Explicit ``pump``/``length``/``dwell`` arguments override the sidecar.
    """
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise FormatError(f"{path}: row 1: expected header {','.join(CSV_HEADER)}")
        for n, row in enumerate(reader, start=2):
            if len(row) != len(CSV_HEADER):
                raise FormatError(f"{path}: row {n}: expected {len(CSV_HEADER)} fields, got {len(row)}")
            try:
                vals = [float(row[0]), float(row[1])] + [_count(v) for v in row[2:]]
            except ValueError:
                raise FormatError(f"{path}: row {n}: non-numeric field") from None
            if not all(math.isfinite(v) for v in vals):
                raise FormatError(f"{path}: row {n}: non-finite field")
            if any(v < 0 for v in vals[2:]):
                raise FormatError(f"{path}: row {n}: negative count")
            rows.append(vals)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text())
    pump = pump if pump is not None else meta.get("pump_m")
    length = length if length is not None else meta.get("length_m")
    dwell = dwell if dwell is not None else meta.get("dwell_s", 1.0)
    if pump is None:
        raise FormatError(f"{path}: pump wavelength unknown (no sidecar and no override)")
    cols = list(zip(*rows))

    def counts(c):
        return np.array(c, dtype=np.int64 if all(isinstance(v, int) for v in c) else float)

    return Interferogram(signal_wavelength=np.array(cols[0]), idler_wavelength=np.array(cols[1]),
                         coincidences=counts(cols[2]), singles_s=counts(cols[3]),
                         singles_i=counts(cols[4]), pump=float(pump), dwell=float(dwell),
                         seed=meta.get("seed"), run=meta.get("run", 0), truth=meta.get("truth"),
                         length=length, warnings=meta.get("warnings", []))
