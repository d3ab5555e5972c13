"""CSV tables, metadata and run manifests.

CSV files carry no timestamps, so identical inputs give byte-identical files.
The wall-clock time lives only in the manifest.
"""
from __future__ import annotations

import datetime
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__, dispersion
from .config import InterferometerConfig, config_hash, config_to_dict
from .observables import Spectrum

FLOAT_FORMAT = "{:.10e}"
SPECTRUM_COLUMNS = ("frequency_THz", "wavelength_nm", "photon_number_density")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return "nan" if math.isnan(value) else FLOAT_FORMAT.format(value)
    if isinstance(value, (list, tuple)):
        return ";".join(_fmt(v) for v in value)
    text = str(value)
    return f'"{text}"' if ("," in text or '"' in text) else text


def material_versions(config: InterferometerConfig) -> dict:
    names = {f"{config.crystal.material}_o", f"{config.crystal.material}_e"}
    names.update(rod.material for rod in config.gap.rods)
    out = {}
    for name in sorted(names):
        model = dispersion.get_material(name)
        out[name] = {"version": model.version, "source": model.source}
    return out


def header_line(config: InterferometerConfig, **extra) -> str:
    items = {"config_hash": config_hash(config), "tool_version": __version__}
    items.update(extra)
    return "# " + " ".join(f"{k}={_fmt(v)}" for k, v in items.items())


def write_spectrum_csv(path, spectrum: Spectrum, config: InterferometerConfig, **extra) -> Path:
    """frequency_THz, wavelength_nm, photon_number_density (per rad/s)."""
    path = Path(path)
    meta = dict(sorted(spectrum.meta.items()))
    meta.update(extra)
    lines = [header_line(config, density_unit="photons_per_rad_s", **meta), ",".join(SPECTRUM_COLUMNS)]
    for f, lam, d in zip(spectrum.frequency_thz, spectrum.wavelength_nm, spectrum.density):
        lines.append(",".join(FLOAT_FORMAT.format(v) for v in (f, lam, d)))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_table_csv(path, columns, rows, config: InterferometerConfig, **extra) -> Path:
    """``rows`` are sequences in column order; list values are joined with ';'."""
    path = Path(path)
    lines = [header_line(config, **extra), ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_metadata(path, config: InterferometerConfig, **extra) -> Path:
    grid = config.grid
    data = {
        "config_hash": config_hash(config),
        "tool_version": __version__,
        "config": config_to_dict(config),
        "grid": {
            "n_points": grid.n_points,
            "center_rad_s": grid.center,
            "half_span_rad_s": grid.half_span,
            "step_rad_s": grid.step,
        },
        "materials": material_versions(config),
        "conventions": {
            "k_double_prime_d": "round trip: k'' * passes * rod length, ps^2",
            "fwhm": "THz, outermost half-maximum crossings of the photon-number density",
            "photon_number_density": "photons per rad/s (signal arm)",
            "gain": config.run.gain_convention,
        },
    }
    data.update(extra)
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return Path(path)


@dataclass
class RunManifest:
    command: str
    config_path: str
    config_hash: str
    output_directory: str
    tool_version: str = __version__
    material_versions: dict = field(default_factory=dict)
    timestamp: str = field(default_factory=lambda: datetime.datetime.now(datetime.timezone.utc).isoformat())
    files: list = field(default_factory=list)

    def add(self, path) -> Path:
        path = Path(path)
        name = Path(os.path.relpath(path, self.output_directory)).as_posix()
        if name not in self.files:
            self.files.append(name)
        return path

    @property
    def path(self) -> Path:
        return Path(self.output_directory) / f"{self.command.replace('-', '_')}_manifest.json"

    def write(self) -> Path:
        self.files.sort()
        self.path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return self.path
