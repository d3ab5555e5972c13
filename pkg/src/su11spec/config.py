"""Interferometer description: loading, validation and serialization.

Config files are TOML with four sections. Every key carries its unit in its
name, values are kept in those units on the dataclasses (so that
``load_config(serialize(cfg)) == cfg`` holds exactly) and SI quantities are
exposed as properties.

    [pump]     wavelength_nm, duration_ps, path_offset_mm, drift_phase_rad, timing
    [crystal]  material, length_mm, theta_rad (optional, solved when absent)
    [gap]      passes, pdc_air_path_m, rods = [{material, length_cm}, ...]
    [run]      gain, gain_convention, n_points, half_span_thz (optional),
               grid_step_fraction, spectrometer_resolution_nm, phases, rank_tolerance

Pulse duration is the intensity FWHM of a transform-limited Gaussian pulse.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from . import dispersion
from ._toml import dump_toml, load_toml

CONFIG_DIR = Path(__file__).parent / "data" / "configs"

TIMINGS = ("matched", "gap")
GAIN_CONVENTIONS = ("dominant_mode", "coupling")


class ConfigError(ValueError):
    """Invalid or unreadable configuration."""


def pump_spectral_width(pulse_duration: float) -> float:
    """Delta omega_p [rad/s] of the Gaussian pump amplitude exp(-W^2 / 4 Delta^2).

    Intensity FWHM ``T`` means E(t) ~ exp(-2 ln2 t^2/T^2), whose spectrum is
    exp(-W^2 T^2 / (8 ln2)); matching exponents gives sqrt(2 ln2) / T.
    """
    if not pulse_duration > 0:
        raise ConfigError(f"pulse duration must be > 0, got {pulse_duration}")
    return math.sqrt(2.0 * math.log(2.0)) / pulse_duration


@dataclass(frozen=True)
class FrequencyGrid:
    n_points: int
    center: float  # rad/s
    half_span: float  # rad/s

    def __post_init__(self):
        if self.n_points < 64 or self.n_points % 2:
            raise ConfigError(f"n_points must be even and >= 64, got {self.n_points}")
        if not self.half_span > 0:
            raise ConfigError(f"grid half span must be > 0, got {self.half_span}")

    @property
    def step(self) -> float:
        return 2.0 * self.half_span / self.n_points

    @cached_property
    def omega(self) -> np.ndarray:
        """Cell centers, symmetric about ``center``; no sample sits on it."""
        offsets = (np.arange(self.n_points) - (self.n_points - 1) / 2.0) * self.step
        return self.center + offsets


@dataclass(frozen=True)
class PumpConfig:
    wavelength_nm: float
    duration_ps: float
    path_offset_mm: float = 0.0
    drift_phase_rad: float = 0.0
    timing: str = "matched"

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * SPEED_OF_LIGHT / (self.wavelength_nm * 1e-9)

    @property
    def bandwidth(self) -> float:
        return pump_spectral_width(self.duration_ps * 1e-12)

    @property
    def path_offset(self) -> float:
        return self.path_offset_mm * 1e-3


@dataclass(frozen=True)
class CrystalConfig:
    material: str
    length_mm: float
    theta_rad: float

    @property
    def length(self) -> float:
        return self.length_mm * 1e-3

    @cached_property
    def model(self) -> dispersion.UniaxialCrystal:
        return dispersion.get_crystal(self.material, self.length, self.theta_rad)


@dataclass(frozen=True)
class Rod:
    material: str
    length_cm: float

    @property
    def length(self) -> float:
        return self.length_cm * 1e-2


@dataclass(frozen=True)
class GapConfig:
    rods: tuple = ()
    passes: int = 2
    pdc_air_path_m: float = 0.0

    def gvd_parameter(self, omega: float) -> float:
        """Round-trip k''d [s^2] of the rods at ``omega``."""
        total = 0.0
        for rod in self.rods:
            sample = dispersion.wavenumber_derivatives(dispersion.get_material(rod.material), None, omega)
            total += sample.k_double_prime * rod.length * self.passes
        return total


@dataclass(frozen=True)
class RunConfig:
    gain: float = 7.0
    gain_convention: str = "dominant_mode"
    n_points: int = 512
    half_span_thz: float = 13.0
    spectrometer_resolution_nm: float = 0.3
    phases: int = 8
    rank_tolerance: float = 1e-14  # discarded mass stays below ~1e-12


@dataclass(frozen=True)
class InterferometerConfig:
    pump: PumpConfig
    crystal: CrystalConfig
    gap: GapConfig = field(default_factory=GapConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def __post_init__(self):
        _validate(self)

    @property
    def gain(self) -> float:
        return self.run.gain

    @property
    def grid(self) -> FrequencyGrid:
        return FrequencyGrid(
            n_points=self.run.n_points,
            center=self.pump.omega / 2.0,
            half_span=self.run.half_span_thz * 2e12 * math.pi,
        )

    @property
    def gvd_parameter(self) -> float:
        return self.gap.gvd_parameter(self.pump.omega / 2.0)

    def evolve(self, **sections) -> "InterferometerConfig":
        """Copy with fields replaced; keys are ``section__field`` or whole sections."""
        updates = {}
        nested = {}
        for key, value in sections.items():
            if "__" in key:
                sec, name = key.split("__", 1)
                nested.setdefault(sec, {})[name] = value
            else:
                updates[key] = value
        for sec, fields_ in nested.items():
            updates[sec] = replace(updates.get(sec, getattr(self, sec)), **fields_)
        return replace(self, **updates)


def _validate(cfg: InterferometerConfig) -> None:
    p, g, r = cfg.pump, cfg.gap, cfg.run
    if not p.duration_ps > 0:
        raise ConfigError(f"pump.duration_ps must be > 0, got {p.duration_ps}")
    if not p.wavelength_nm > 0:
        raise ConfigError(f"pump.wavelength_nm must be > 0, got {p.wavelength_nm}")
    if p.timing not in TIMINGS:
        raise ConfigError(f"pump.timing must be one of {TIMINGS}, got {p.timing!r}")
    if not cfg.crystal.length_mm > 0:
        raise ConfigError(f"crystal.length_mm must be > 0, got {cfg.crystal.length_mm}")
    if not 0.0 <= cfg.crystal.theta_rad <= math.pi / 2:
        raise ConfigError(f"crystal.theta_rad must lie in [0, pi/2], got {cfg.crystal.theta_rad}")
    if g.passes not in (1, 2):
        raise ConfigError(f"gap.passes must be 1 or 2, got {g.passes}")
    if g.pdc_air_path_m < 0:
        raise ConfigError(f"gap.pdc_air_path_m must be >= 0, got {g.pdc_air_path_m}")
    for rod in g.rods:
        if rod.length_cm < 0:
            raise ConfigError(f"gap.rods: length_cm must be >= 0, got {rod.length_cm} for {rod.material}")
        _require_material(rod.material, "gap.rods")
    if not r.gain > 0:
        raise ConfigError(f"run.gain must be > 0, got {r.gain}")
    if r.gain_convention not in GAIN_CONVENTIONS:
        raise ConfigError(f"run.gain_convention must be one of {GAIN_CONVENTIONS}, got {r.gain_convention!r}")
    if r.n_points < 64 or r.n_points % 2:
        raise ConfigError(f"run.n_points must be even and >= 64, got {r.n_points}")
    if not r.half_span_thz > 0:
        raise ConfigError(f"run.half_span_thz must be > 0, got {r.half_span_thz}")
    if not r.spectrometer_resolution_nm > 0:
        raise ConfigError(f"run.spectrometer_resolution_nm must be > 0, got {r.spectrometer_resolution_nm}")
    if r.phases < 1:
        raise ConfigError(f"run.phases must be >= 1, got {r.phases}")
    if not r.rank_tolerance >= 0:
        raise ConfigError(f"run.rank_tolerance must be >= 0, got {r.rank_tolerance}")
    crystal = cfg.crystal.model  # raises for unknown crystals
    try:
        crystal.extraordinary.check_range(p.wavelength_nm * 1e-3)
    except dispersion.MaterialRangeError as exc:
        raise ConfigError(f"pump.wavelength_nm: {exc}") from None


def _require_material(name: str, where: str) -> None:
    try:
        dispersion.get_material(name)
    except dispersion.MaterialError as exc:
        raise ConfigError(f"{where}: {exc}") from None


_SECTION_KEYS = {
    "pump": {"wavelength_nm", "duration_ps", "path_offset_mm", "drift_phase_rad", "timing"},
    "crystal": {"material", "length_mm", "theta_rad"},
    "gap": {"passes", "pdc_air_path_m", "rods"},
    "run": {"gain", "gain_convention", "n_points", "half_span_thz", "grid_step_fraction",
            "spectrometer_resolution_nm", "phases", "rank_tolerance"},
}
_REQUIRED = {"pump": {"wavelength_nm", "duration_ps"}, "crystal": {"material", "length_mm"}}


def _number(section: str, key: str, value, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key}: expected a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"{section}.{key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def config_from_dict(data: dict) -> InterferometerConfig:
    unknown = set(data) - set(_SECTION_KEYS)
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    for sec, keys in _SECTION_KEYS.items():
        extra = set(data.get(sec, {})) - keys
        if extra:
            raise ConfigError(f"[{sec}]: unknown keys {sorted(extra)}")
        missing = _REQUIRED.get(sec, set()) - set(data.get(sec, {}))
        if missing:
            raise ConfigError(f"[{sec}]: missing keys {sorted(missing)}")

    p = data["pump"]
    pump = PumpConfig(
        wavelength_nm=_number("pump", "wavelength_nm", p["wavelength_nm"]),
        duration_ps=_number("pump", "duration_ps", p["duration_ps"]),
        path_offset_mm=_number("pump", "path_offset_mm", p.get("path_offset_mm", 0.0)),
        drift_phase_rad=_number("pump", "drift_phase_rad", p.get("drift_phase_rad", 0.0)),
        timing=str(p.get("timing", "matched")),
    )

    g = data.get("gap", {})
    rods = []
    for i, rod in enumerate(g.get("rods", [])):
        if not isinstance(rod, dict) or set(rod) != {"material", "length_cm"}:
            raise ConfigError(f"gap.rods[{i}]: expected {{material, length_cm}}, got {rod!r}")
        rods.append(Rod(str(rod["material"]), _number("gap.rods", "length_cm", rod["length_cm"])))
    gap = GapConfig(
        rods=tuple(rods),
        passes=_number("gap", "passes", g.get("passes", 2), int),
        pdc_air_path_m=_number("gap", "pdc_air_path_m", g.get("pdc_air_path_m", 0.0)),
    )

    r = data.get("run", {})
    defaults = RunConfig()
    n_points = _number("run", "n_points", r.get("n_points", defaults.n_points), int)
    if "half_span_thz" in r:
        half_span_thz = _number("run", "half_span_thz", r["half_span_thz"])
    else:
        # step resolves the pump ridge of the joint spectrum
        fraction = _number("run", "grid_step_fraction", r.get("grid_step_fraction", 0.25))
        if not fraction > 0:
            raise ConfigError(f"run.grid_step_fraction must be > 0, got {fraction}")
        step = fraction * pump_spectral_width(pump.duration_ps * 1e-12) if pump.duration_ps > 0 else 1.0
        half_span_thz = n_points / 2 * step / (2e12 * math.pi)
    run = RunConfig(
        gain=_number("run", "gain", r.get("gain", defaults.gain)),
        gain_convention=str(r.get("gain_convention", defaults.gain_convention)),
        n_points=n_points,
        half_span_thz=half_span_thz,
        spectrometer_resolution_nm=_number(
            "run", "spectrometer_resolution_nm",
            r.get("spectrometer_resolution_nm", defaults.spectrometer_resolution_nm)),
        phases=_number("run", "phases", r.get("phases", defaults.phases), int),
        rank_tolerance=_number("run", "rank_tolerance", r.get("rank_tolerance", defaults.rank_tolerance)),
    )

    cr = data["crystal"]
    material = str(cr["material"])
    length_mm = _number("crystal", "length_mm", cr["length_mm"])
    try:
        if "theta_rad" in cr:
            theta = _number("crystal", "theta_rad", cr["theta_rad"])
        else:
            if not length_mm > 0:
                raise ConfigError(f"crystal.length_mm must be > 0, got {length_mm}")
            probe = dispersion.get_crystal(material, length_mm * 1e-3)
            theta = dispersion.solve_phase_matching_angle(probe, pump.wavelength_nm * 1e-3)
        return InterferometerConfig(pump=pump, crystal=CrystalConfig(material, length_mm, theta), gap=gap, run=run)
    except (dispersion.MaterialError, dispersion.MaterialRangeError, dispersion.PhaseMatchingError) as exc:
        raise ConfigError(str(exc)) from None


def resolve_config_path(name_or_path) -> Path:
    """A filesystem path, or the stem of a config shipped with the package."""
    path = Path(name_or_path)
    if path.is_file():
        return path
    shipped = CONFIG_DIR / f"{name_or_path}.toml"
    if shipped.is_file():
        return shipped
    raise FileNotFoundError(f"config not found: {name_or_path}")


def load_config(source) -> InterferometerConfig:
    """Load from a path (or shipped config name) and validate."""
    path = resolve_config_path(source)
    return loads_config(path.read_text(), origin=str(path))


def loads_config(text: str, origin: str = "<string>") -> InterferometerConfig:
    try:
        data = load_toml(text)
    except Exception as exc:
        raise ConfigError(f"{origin}: cannot parse: {exc}") from None
    return config_from_dict(data)


def config_to_dict(cfg: InterferometerConfig) -> dict:
    return {
        "pump": {
            "wavelength_nm": cfg.pump.wavelength_nm,
            "duration_ps": cfg.pump.duration_ps,
            "path_offset_mm": cfg.pump.path_offset_mm,
            "drift_phase_rad": cfg.pump.drift_phase_rad,
            "timing": cfg.pump.timing,
        },
        "crystal": {
            "material": cfg.crystal.material,
            "length_mm": cfg.crystal.length_mm,
            "theta_rad": cfg.crystal.theta_rad,
        },
        "gap": {
            "passes": cfg.gap.passes,
            "pdc_air_path_m": cfg.gap.pdc_air_path_m,
            "rods": [{"material": r.material, "length_cm": r.length_cm} for r in cfg.gap.rods],
        },
        "run": {
            "gain": cfg.run.gain,
            "gain_convention": cfg.run.gain_convention,
            "n_points": cfg.run.n_points,
            "half_span_thz": cfg.run.half_span_thz,
            "spectrometer_resolution_nm": cfg.run.spectrometer_resolution_nm,
            "phases": cfg.run.phases,
            "rank_tolerance": cfg.run.rank_tolerance,
        },
    }


def serialize(cfg: InterferometerConfig) -> str:
    return dump_toml(config_to_dict(cfg))


def config_hash(cfg: InterferometerConfig) -> str:
    return hashlib.sha256(serialize(cfg).encode()).hexdigest()[:16]


def load_rod_ladder(source: Optional[str] = None) -> list:
    """Rod sets for a GVD sweep: ``[[rod_set]]`` tables with ``name`` and ``rods``."""
    path = resolve_config_path(source or "rod_ladder")
    data = load_toml(path.read_text())
    if set(data) - {"rod_set"}:
        raise ConfigError(f"{path}: unknown keys {sorted(set(data) - {'rod_set'})}")
    ladder = []
    for i, entry in enumerate(data.get("rod_set", [])):
        if set(entry) - {"name", "rods"} or "rods" not in entry:
            raise ConfigError(f"{path}: rod_set[{i}] must have 'name' and 'rods'")
        rods = []
        for rod in entry["rods"]:
            if not isinstance(rod, dict) or set(rod) != {"material", "length_cm"}:
                raise ConfigError(f"{path}: rod_set[{i}]: bad rod {rod!r}")
            _require_material(str(rod["material"]), f"rod_set[{i}]")
            rods.append(Rod(str(rod["material"]), float(rod["length_cm"])))
        ladder.append((str(entry.get("name", f"set{i}")), tuple(rods)))
    return ladder
