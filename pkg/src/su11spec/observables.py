"""Spectra and the scalar observables taken from them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.signal

from .dispersion import wavelength_from_omega

SINGLE_MODE_G2 = 3.0  # degenerate collinear squeezed vacuum
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class Spectrum:
    """Photon-number density per rad/s on an increasing angular-frequency axis."""

    omega: np.ndarray
    density: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.omega.shape != self.density.shape or self.omega.ndim != 1:
            raise ValueError("omega and density must be 1-D arrays of equal length")
        if len(self.omega) > 1 and not np.all(np.diff(self.omega) > 0):
            raise ValueError("frequency axis must be strictly increasing")
        if np.any(self.density < 0):
            raise ValueError("spectral density must be non-negative")

    @property
    def frequency_thz(self) -> np.ndarray:
        return self.omega / (2e12 * math.pi)

    @property
    def wavelength_nm(self) -> np.ndarray:
        return wavelength_from_omega(self.omega) * 1e3

    @property
    def step(self) -> float:
        return float(np.mean(np.diff(self.omega)))

    def density_per_nm(self) -> np.ndarray:
        """The same spectrum as a density per nm of wavelength (|dw/dl| applied)."""
        lam_nm = self.wavelength_nm
        return self.density * self.omega / lam_nm

    def total(self) -> float:
        return float(np.sum(self.density) * self.step)

    def scaled(self, factor: float) -> "Spectrum":
        return Spectrum(self.omega, self.density * factor, dict(self.meta))


@dataclass(frozen=True)
class CoherenceReport:
    K: float
    g2: float


class Fwhm(NamedTuple):
    width_thz: float
    multi_peaked: bool  # more than two half-maximum crossings
    resolution_limited: bool  # width within two grid steps


class Peak(NamedTuple):
    omega: float
    height: float
    prominence: float

    @property
    def frequency_thz(self) -> float:
        return self.omega / (2e12 * math.pi)


def effective_mode_number(lambda_tilde) -> float:
    """Participation ratio 1 / sum lambda~_k^2."""
    lam = np.asarray(lambda_tilde, dtype=float)
    if lam.size == 0:
        raise ValueError("no weights")
    return float(1.0 / np.sum(lam**2))


def g2_from_K(K: float) -> float:
    if not K >= 1.0 - 1e-12:
        raise ValueError(f"effective mode number must be >= 1, got {K}")
    return 1.0 + (SINGLE_MODE_G2 - 1.0) / K


def coherence(lambda_tilde) -> CoherenceReport:
    K = effective_mode_number(lambda_tilde)
    return CoherenceReport(K=K, g2=g2_from_K(K))


def fwhm(spectrum: Spectrum) -> Fwhm:
    """Width between the outermost half-maximum crossings, linearly interpolated."""
    y = np.asarray(spectrum.density, dtype=float)
    x = spectrum.frequency_thz
    if y.size < 2 or not np.max(y) > 0:
        raise ValueError("spectrum is empty or flat")
    peak = np.max(y)
    if np.all(y >= peak * (1 - 1e-12)):
        raise ValueError("spectrum is flat")
    half = peak / 2.0
    above = y >= half
    edges = np.flatnonzero(np.diff(above.astype(np.int8)))
    crossings = []
    for i in edges:
        # crossing between samples i and i+1
        crossings.append(x[i] + (half - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i]))
    lo = x[0] if above[0] else crossings[0]
    hi = x[-1] if above[-1] else crossings[-1]
    width = float(hi - lo)
    step = float(np.mean(np.diff(x)))
    return Fwhm(width_thz=width, multi_peaked=len(crossings) > 2, resolution_limited=width <= 2 * step)


def convolve_spectrometer(spectrum: Spectrum, resolution_fwhm_nm: float) -> Spectrum:
    """Gaussian instrument response of the given FWHM in wavelength.

    Each frequency bin's photon number is spread over the output bins with a
    wavelength-domain Gaussian renormalized over the bins that exist, so the
    total is conserved and nothing goes negative.
    """
    if not resolution_fwhm_nm > 0:
        raise ValueError(f"spectrometer resolution must be > 0, got {resolution_fwhm_nm}")
    lam = spectrum.wavelength_nm
    sigma = resolution_fwhm_nm / FWHM_PER_SIGMA
    # bin widths in wavelength, for the output density measure
    dlam = np.abs(np.gradient(lam))
    kernel = np.exp(-0.5 * ((lam[:, None] - lam[None, :]) / sigma) ** 2) * dlam[:, None]
    kernel /= kernel.sum(axis=0, keepdims=True)
    counts = spectrum.density * spectrum.step
    out = kernel @ counts
    out = np.clip(out, 0.0, None) / spectrum.step
    meta = dict(spectrum.meta, spectrometer_resolution_nm=resolution_fwhm_nm)
    return Spectrum(spectrum.omega, out, meta)


def find_peaks(spectrum: Spectrum, min_prominence: float = 0.1) -> list:
    """Local maxima with prominence >= ``min_prominence`` times the global maximum.

    Prominence is measured against the higher of the two flanking minima.
    Sorted by height, tallest first.
    """
    y = np.asarray(spectrum.density, dtype=float)
    if y.size == 0:
        raise ValueError("empty spectrum")
    top = np.max(y)
    if not top > 0:
        return []
    idx, props = scipy.signal.find_peaks(y, prominence=min_prominence * top)
    peaks = [Peak(float(spectrum.omega[i]), float(y[i]), float(p)) for i, p in zip(idx, props["prominences"])]
    return sorted(peaks, key=lambda p: -p.height)


def fringe_contrast(spectrum: Spectrum, center: float, half_width: float) -> float:
    """Largest visibility (max - min)/(max + min) of adjacent extrema in a window.

    The window is ``center +- half_width`` in rad/s. Returns 0 when the window
    holds no interior extremum pair.
    """
    mask = np.abs(spectrum.omega - center) <= half_width
    y = spectrum.density[mask]
    if y.size < 3:
        return 0.0
    d = np.diff(y)
    turning = np.flatnonzero(np.sign(d[1:]) * np.sign(d[:-1]) < 0) + 1
    if turning.size < 2:
        return 0.0
    vals = y[turning]
    hi = np.maximum(vals[1:], vals[:-1])
    lo = np.minimum(vals[1:], vals[:-1])
    vis = (hi - lo) / np.where(hi + lo > 0, hi + lo, 1.0)
    return float(np.max(vis))


def peak_width(spectrum: Spectrum, peak: Peak) -> float:
    """FWHM [THz] of one peak: half-height crossings found walking outward from it."""
    y = spectrum.density
    x = spectrum.frequency_thz
    i0 = int(np.argmin(np.abs(spectrum.omega - peak.omega)))
    half = y[i0] / 2.0

    def crossing(direction):
        i = i0
        while 0 <= i + direction < len(y) and y[i + direction] >= half:
            i += direction
        j = i + direction
        if not 0 <= j < len(y):
            return x[i]
        return x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i])

    return float(crossing(1) - crossing(-1))
