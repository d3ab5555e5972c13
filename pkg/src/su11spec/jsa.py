"""Joint spectral amplitude of the two-crystal interferometer and of a single crystal.

    F = sinc(d/2) exp[-(ws + wi - wp)^2 / 4 Dw^2] exp[-i(d + d'/2)] cos[(d + d')/2]

``d`` is the phase mismatch of one crystal and ``d'`` the mismatch picked up
between the crystals. The gap phase of the down-converted light is

    phi(w) = sum_rods k_rod(w) * passes * length + w/c * pdc_air_path

and the pump follows a path timed against it: its phase is referenced to
``2 phi(w0)`` with group delay ``phi'(w0)`` (``timing="gap"``), additionally
minus the pump/down-converted group-delay walk-off of the first crystal
(``timing="matched"``, the delay that maximizes gain at degeneracy). The pump
path offset adds ``wp/c * offset`` and the slow drift phase enters with a minus sign.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from . import dispersion
from .config import FrequencyGrid, InterferometerConfig


@dataclass(frozen=True)
class MismatchField:
    delta: np.ndarray
    delta_prime: np.ndarray


@dataclass(frozen=True)
class JointSpectralAmplitude:
    grid: FrequencyGrid
    values: np.ndarray  # complex, values[i, j] = F(w_i signal, w_j idler)
    norm: float  # Frobenius norm before normalization

    @property
    def shape(self):
        return self.values.shape


def sinc_half(x):
    """sin(x)/x with the removable singularity handled by its series."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 - x * x / 6.0, np.sin(safe) / safe)


def _range_context(exc, config, omegas):
    lam = dispersion.wavelength_from_omega(np.asarray(omegas)) * 1e3
    return dispersion.MaterialRangeError(
        f"{exc} (grid spans {lam.min():.1f}-{lam.max():.1f} nm around "
        f"{2 * config.pump.wavelength_nm:.1f} nm; reduce run.half_span_thz)"
    )


def crystal_mismatch_at(config: InterferometerConfig, omega_s, omega_i):
    """[k_p(ws + wi) - k_o(ws) - k_o(wi)] L on broadcastable frequency arrays."""
    crystal = config.crystal.model
    ws = np.asarray(omega_s, dtype=float)
    wi = np.asarray(omega_i, dtype=float)
    try:
        k_pump = dispersion.wavenumber(crystal, crystal.theta, ws + wi)
        k_pair = dispersion.wavenumber(crystal, None, ws) + dispersion.wavenumber(crystal, None, wi)
    except dispersion.MaterialRangeError as exc:
        raise _range_context(exc, config, np.concatenate([np.ravel(ws), np.ravel(wi)])) from None
    return (k_pump - k_pair) * crystal.length


def gap_phase(config: InterferometerConfig, omega):
    """phi(w): phase of the down-converted light across the gap [rad]."""
    omega = np.asarray(omega, dtype=float)
    phase = omega / SPEED_OF_LIGHT * config.gap.pdc_air_path_m
    for rod in config.gap.rods:
        material = dispersion.get_material(rod.material)
        try:
            k = dispersion.wavenumber(material, None, omega)
        except dispersion.MaterialRangeError as exc:
            raise _range_context(exc, config, omega) from None
        phase = phase + k * (config.gap.passes * rod.length)
    return phase


def gap_group_delay(config: InterferometerConfig, omega: float) -> float:
    """d phi / d w at ``omega`` [s]."""
    delay = config.gap.pdc_air_path_m / SPEED_OF_LIGHT
    for rod in config.gap.rods:
        material = dispersion.get_material(rod.material)
        delay += dispersion.wavenumber_derivatives(material, None, omega).k_prime * config.gap.passes * rod.length
    return delay


def crystal_walkoff_delay(config: InterferometerConfig) -> float:
    """(k_p' - k_s') L at degeneracy [s]: pump/down-converted group delay in one crystal."""
    crystal = config.crystal.model
    wp = config.pump.omega
    kp = dispersion.wavenumber_derivatives(crystal, crystal.theta, wp).k_prime
    ks = dispersion.wavenumber_derivatives(crystal, None, wp / 2).k_prime
    return (kp - ks) * crystal.length


def pump_reference_delay(config: InterferometerConfig) -> float:
    w0 = config.pump.omega / 2
    delay = gap_group_delay(config, w0)
    if config.pump.timing == "matched":
        delay -= crystal_walkoff_delay(config)
    return delay


def gap_mismatch_at(config: InterferometerConfig, omega_s, omega_i):
    ws = np.asarray(omega_s, dtype=float)
    wi = np.asarray(omega_i, dtype=float)
    wp_bar = config.pump.omega
    wp = ws + wi
    pump_phase = (
        2.0 * gap_phase(config, wp_bar / 2)
        + pump_reference_delay(config) * (wp - wp_bar)
        + wp / SPEED_OF_LIGHT * config.pump.path_offset
    )
    pair_phase = gap_phase(config, ws) + gap_phase(config, wi)
    return pump_phase - pair_phase - config.pump.drift_phase_rad


def _grid_axes(grid: FrequencyGrid):
    w = grid.omega
    return w[:, None], w[None, :]


def crystal_mismatch(config: InterferometerConfig, grid: FrequencyGrid = None) -> np.ndarray:
    ws, wi = _grid_axes(grid or config.grid)
    return crystal_mismatch_at(config, ws, wi)


def gap_mismatch(config: InterferometerConfig, grid: FrequencyGrid = None) -> np.ndarray:
    ws, wi = _grid_axes(grid or config.grid)
    return np.broadcast_to(gap_mismatch_at(config, ws, wi), (ws.size, wi.size)).copy()


def mismatch_field(config: InterferometerConfig, grid: FrequencyGrid = None) -> MismatchField:
    grid = grid or config.grid
    return MismatchField(crystal_mismatch(config, grid), gap_mismatch(config, grid))


def pump_envelope(config: InterferometerConfig, omega_s, omega_i):
    detuning = np.asarray(omega_s) + np.asarray(omega_i) - config.pump.omega
    return np.exp(-(detuning**2) / (4.0 * config.pump.bandwidth**2))


def interferometer_amplitude(delta, delta_prime, envelope):
    """Unnormalized two-crystal amplitude from its mismatch fields."""
    total = delta + delta_prime
    return sinc_half(delta / 2) * envelope * np.exp(-1j * (delta + delta_prime / 2)) * np.cos(total / 2)


def jsa_values(config: InterferometerConfig, omega_s, omega_i):
    """Unnormalized two-crystal F at arbitrary frequencies."""
    delta = crystal_mismatch_at(config, omega_s, omega_i)
    delta_prime = gap_mismatch_at(config, omega_s, omega_i)
    return interferometer_amplitude(delta, delta_prime, pump_envelope(config, omega_s, omega_i))


def _normalized(grid, values) -> JointSpectralAmplitude:
    norm = float(np.linalg.norm(values))
    if not norm > 0 or not np.isfinite(norm):
        raise ArithmeticError(f"joint spectral amplitude has norm {norm}; grid misses the pump ridge")
    return JointSpectralAmplitude(grid=grid, values=values / norm, norm=norm)


def build_jsa(config: InterferometerConfig, grid: FrequencyGrid = None) -> JointSpectralAmplitude:
    grid = grid or config.grid
    ws, wi = _grid_axes(grid)
    fields = mismatch_field(config, grid)
    values = interferometer_amplitude(fields.delta, fields.delta_prime, pump_envelope(config, ws, wi))
    return _normalized(grid, values)


def build_single_crystal_jsa(config: InterferometerConfig, grid: FrequencyGrid = None,
                             propagation_phase: bool = False) -> JointSpectralAmplitude:
    """sinc(d/2) times the pump envelope.

    With ``propagation_phase`` the crystal's own exp(-i d/2) is kept, which is
    what makes a crystal of length 2L coincide with two touching crystals of
    length L.
    """
    grid = grid or config.grid
    ws, wi = _grid_axes(grid)
    delta = crystal_mismatch(config, grid)
    values = sinc_half(delta / 2) * pump_envelope(config, ws, wi)
    if propagation_phase:
        values = values * np.exp(-0.5j * delta)
    else:
        values = values.astype(complex)
    return _normalized(grid, values)


def save_jsa(path, jsa: JointSpectralAmplitude) -> None:
    """Write ``values`` with its grid header as a NumPy ``.npz`` archive."""
    np.savez(
        path,
        values=jsa.values,
        center=np.float64(jsa.grid.center),
        half_span=np.float64(jsa.grid.half_span),
        n_points=np.int64(jsa.grid.n_points),
        norm=np.float64(jsa.norm),
    )


def load_jsa(path) -> JointSpectralAmplitude:
    with np.load(path) as data:
        grid = FrequencyGrid(int(data["n_points"]), float(data["center"]), float(data["half_span"]))
        return JointSpectralAmplitude(grid=grid, values=data["values"], norm=float(data["norm"]))
