"""Run configuration: ``key = value`` files with sections, overridable by flags."""
from __future__ import annotations

import configparser
import hashlib
import math
import os
import warnings
from dataclasses import dataclass, fields, replace

from .biphoton import BiphotonState, PhaseMatchSpec, PumpSpec
from .experiment import LabGeometry

ENV_CONFIG = "NONLOCAL_VORTEX_CONFIG"
SQRT2 = math.sqrt(2.0)


class ConfigError(ValueError):
    pass


def _floats(text):
    if isinstance(text, (tuple, list)):
        return tuple(float(t) for t in text)
    return tuple(float(t) for t in str(text).replace(";", ",").split(",") if t.strip())


def _bool(text):
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _optional_int(text):
    if text is None or str(text).strip() in ("", "none"):
        return None
    return int(text)


# key -> (section, parser); key names are unique across sections so each is also a flag
SCHEMA = {
    "pump": ("state", str),
    "sigma": ("state", float),
    "delta": ("state", float),
    "samples": ("grid", int),
    "span": ("grid", float),
    "plane": ("map", str),
    "wavelength_nm": ("lab", float),
    "f1_mm": ("lab", float),
    "f2_mm": ("lab", float),
    "f3_mm": ("lab", float),
    "f4_mm": ("lab", float),
    "reference_waist_mm": ("lab", float),
    "slit_width_um": ("lab", float),
    "slit_separation_um": ("lab", float),
    "detector1": ("lab", _floats),
    "detector1_center_mm": ("lab", float),
    "scan_half_width_mm": ("lab", float),
    "scan_samples": ("lab", int),
    "aperture1_um": ("detector", float),
    "aperture2_um": ("detector", float),
    "noise_events": ("noise", int),
    "seed": ("noise", _optional_int),
    "out": ("output", str),
    "pgm": ("output", _bool),
}


@dataclass(frozen=True)
class RunConfig:
    pump: str = "hg10"
    sigma: float = SQRT2
    delta: float = SQRT2
    samples: int = 128
    span: float = 6.0
    plane: str = "mixed"
    wavelength_nm: float = 884.0
    f1_mm: float = 100.0
    f2_mm: float = 150.0
    f3_mm: float = 50.0
    f4_mm: float = 250.0
    reference_waist_mm: float = 0.25
    slit_width_um: float = 100.0
    slit_separation_um: float = 200.0
    detector1: tuple = (0.2, 0.4)
    detector1_center_mm: float = 0.3
    scan_half_width_mm: float = 0.4
    scan_samples: int = 161
    aperture1_um: float = 0.0
    aperture2_um: float = 0.0
    noise_events: int = 0
    seed: int | None = None
    out: str = "out"
    pgm: bool = True

    def validate(self) -> "RunConfig":
        if self.pump not in ("hg10", "gauss"):
            raise ConfigError(f"pump must be hg10 or gauss, got {self.pump!r}")
        if self.plane not in ("position", "mixed"):
            raise ConfigError(f"plane must be position or mixed, got {self.plane!r}")
        for name in ("sigma", "delta", "span", "wavelength_nm", "f1_mm", "f2_mm", "f3_mm", "f4_mm",
                     "reference_waist_mm", "slit_width_um", "slit_separation_um", "scan_half_width_mm"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.samples < 2 or self.scan_samples < 8:
            raise ConfigError("too few samples")
        if self.samples & (self.samples - 1):
            warnings.warn(f"samples={self.samples} is not a power of two", stacklevel=2)
        if self.slit_separation_um <= self.slit_width_um:
            raise ConfigError("slit separation must exceed slit width (slits would overlap)")
        if self.aperture1_um < 0 or self.aperture2_um < 0:
            raise ConfigError("aperture widths must be nonnegative")
        if self.noise_events < 0:
            raise ConfigError("noise_events must be nonnegative")
        if self.noise_events and self.seed is None:
            raise ConfigError("a seed is required when noise is enabled")
        if not self.detector1:
            raise ConfigError("at least one detector-1 position is required")
        return self

    @property
    def state(self) -> BiphotonState:
        mode = (1, 0) if self.pump == "hg10" else (0, 0)
        return BiphotonState(PumpSpec(mode, self.sigma), PhaseMatchSpec(self.delta))

    @property
    def lab(self) -> LabGeometry:
        return LabGeometry(wavelength_mm=self.wavelength_nm * 1e-6, f1_mm=self.f1_mm, f2_mm=self.f2_mm,
                           f3_mm=self.f3_mm, f4_mm=self.f4_mm, reference_waist_mm=self.reference_waist_mm,
                           slit_width_mm=self.slit_width_um * 1e-3,
                           slit_separation_mm=self.slit_separation_um * 1e-3,
                           detector1_mm=self.detector1, detector1_center_mm=self.detector1_center_mm,
                           scan_half_width_mm=self.scan_half_width_mm, scan_samples=self.scan_samples)

    def canonical(self) -> str:
        """Stable text form; physics keys only, so the output directory does not change the hash."""
        lines = []
        for f in fields(self):
            if f.name in ("out", "pgm"):
                continue
            lines.append(f"{f.name}={getattr(self, f.name)!r}")
        return "\n".join(lines)

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def with_overrides(self, values: dict) -> "RunConfig":
        parsed = {}
        for key, raw in values.items():
            if raw is None:
                continue
            if key not in SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                parsed[key] = SCHEMA[key][1](raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None
        return replace(self, **parsed)


def read_config_file(path) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in SCHEMA:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            if SCHEMA[key][0] != section:
                raise ConfigError(f"key {key!r} belongs in [{SCHEMA[key][0]}], not [{section}]")
            values[key] = raw
    return values


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the config file (``path`` or ``$NONLOCAL_VORTEX_CONFIG``), then flags."""
    path = path or os.environ.get(ENV_CONFIG)
    cfg = RunConfig()
    if path:
        cfg = cfg.with_overrides(read_config_file(path))
    if overrides:
        cfg = cfg.with_overrides(overrides)
    return cfg.validate()


def write_config_file(cfg: RunConfig, path) -> None:
    parser = configparser.ConfigParser()
    for key, (section, _) in SCHEMA.items():
        if not parser.has_section(section):
            parser.add_section(section)
        v = getattr(cfg, key)
        if isinstance(v, tuple):
            v = ", ".join(repr(x) for x in v)
        parser.set(section, key, "" if v is None else str(v))
    with open(path, "w") as fh:
        parser.write(fh)
