"""Material dispersion: refractive index, wavenumber and its frequency derivatives.

Materials are Sellmeier models loaded from small TOML files, one per model.
Two dispersion forms are understood, with the wavelength ``l`` in microns:

``sellmeier3``
    n^2 = 1 + sum_j B_j l^2 / (l^2 - C_j), coefficients ``[B1, B2, B3, C1, C2, C3]``.
``bbo2q``
    n^2 = A + B / (l^2 - C) - D l^2, coefficients ``[A, B, C, D]``.
``vacuum``
    n = 1, no coefficients.

Wavenumber derivatives are analytic (chain rule through l^2); a central
finite-difference version is kept for cross-checking only.
"""
from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.optimize import bisect

from ._toml import load_toml

MATERIALS_ENV = "SU11SPEC_MATERIALS_DIR"
_PACKAGE_MATERIALS = Path(__file__).parent / "data" / "materials"

FORMS = {"sellmeier3": 6, "bbo2q": 4, "vacuum": 0}

# 2*pi*c in um*rad/s; lambda_um = _TWO_PI_C_UM / omega
_TWO_PI_C_UM = 2.0 * math.pi * SPEED_OF_LIGHT * 1e6


class MaterialError(ValueError):
    """Unknown material or malformed material file."""


class MaterialRangeError(ValueError):
    """Wavelength outside a material's tabulated range."""


class PhaseMatchingError(ValueError):
    """No collinear phase-matching angle exists for the request."""


@dataclass(frozen=True)
class SellmeierModel:
    name: str
    form: str
    coefficients: tuple
    valid_range: tuple  # (min_um, max_um)
    source: str = ""
    version: str = ""

    def __post_init__(self):
        if self.form not in FORMS:
            raise MaterialError(f"{self.name}: unknown dispersion form {self.form!r}")
        if len(self.coefficients) != FORMS[self.form]:
            raise MaterialError(
                f"{self.name}: form {self.form!r} takes {FORMS[self.form]} coefficients, "
                f"got {len(self.coefficients)}"
            )
        lo, hi = self.valid_range
        if not 0 < lo < hi:
            raise MaterialError(f"{self.name}: bad valid range {self.valid_range}")

    def check_range(self, wavelength_um) -> None:
        lam = np.asarray(wavelength_um, dtype=float)
        lo, hi = self.valid_range
        if lam.size and (np.min(lam) < lo or np.max(lam) > hi or not np.all(np.isfinite(lam))):
            a, b = np.min(lam), np.max(lam)
            span = f"{a:.4g}" if a == b else f"{a:.4g}-{b:.4g}"
            raise MaterialRangeError(f"{self.name}: wavelength {span} um outside valid range {lo}-{hi} um")


@dataclass(frozen=True)
class UniaxialCrystal:
    name: str
    ordinary: SellmeierModel
    extraordinary: SellmeierModel
    length: float  # m
    theta: float = 0.0  # rad, angle between propagation and optic axis

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"crystal length must be > 0, got {self.length}")
        if not 0.0 <= self.theta <= math.pi / 2:
            raise ValueError(f"cut angle must lie in [0, pi/2], got {self.theta}")


@dataclass(frozen=True)
class DispersionSample:
    k: float  # rad/m
    k_prime: float  # s/m
    k_double_prime: float  # s^2/m


# -- loading -----------------------------------------------------------------

def materials_dir() -> Path:
    override = os.environ.get(MATERIALS_ENV)
    return Path(override) if override else _PACKAGE_MATERIALS


def parse_material(text: str, origin: str = "<string>") -> SellmeierModel:
    data = load_toml(text)
    allowed = {"name", "form", "coefficients", "valid_range_um", "source", "version"}
    unknown = set(data) - allowed
    if unknown:
        raise MaterialError(f"{origin}: unknown keys {sorted(unknown)}")
    try:
        return SellmeierModel(
            name=str(data["name"]),
            form=str(data["form"]),
            coefficients=tuple(float(x) for x in data["coefficients"]),
            valid_range=tuple(float(x) for x in data["valid_range_um"]),
            source=str(data.get("source", "")),
            version=str(data.get("version", "")),
        )
    except KeyError as exc:
        raise MaterialError(f"{origin}: missing key {exc.args[0]!r}") from None


@functools.lru_cache(maxsize=None)
def _load_cached(directory: str, name: str) -> SellmeierModel:
    path = Path(directory) / f"{name}.toml"
    if not path.is_file():
        raise MaterialError(f"unknown material {name!r} (no {path.name} in {directory})")
    model = parse_material(path.read_text(), origin=str(path))
    if model.name != name:
        raise MaterialError(f"{path}: file declares name {model.name!r}")
    return model


def get_material(name: str) -> SellmeierModel:
    return _load_cached(str(materials_dir()), name)


def available_materials() -> list:
    return sorted(p.stem for p in materials_dir().glob("*.toml"))


def get_crystal(name: str, length: float, theta: float = 0.0) -> UniaxialCrystal:
    """Uniaxial crystal from the ``<name>_o`` / ``<name>_e`` model pair."""
    return UniaxialCrystal(
        name=name,
        ordinary=get_material(f"{name}_o"),
        extraordinary=get_material(f"{name}_e"),
        length=length,
        theta=theta,
    )


# -- evaluation --------------------------------------------------------------

def _n2_and_derivs(model: SellmeierModel, x):
    """n^2 = f(x) with x = lambda^2 [um^2], and df/dx, d2f/dx2."""
    co = model.coefficients
    if model.form == "vacuum":
        one = np.ones_like(x)
        return one, 0.0 * x, 0.0 * x
    if model.form == "sellmeier3":
        f = np.ones_like(x)
        f1 = np.zeros_like(x)
        f2 = np.zeros_like(x)
        for b, cc in zip(co[:3], co[3:]):
            den = x - cc
            f = f + b * x / den
            f1 = f1 - b * cc / den**2
            f2 = f2 + 2.0 * b * cc / den**3
        return f, f1, f2
    a, b, cc, d = co
    den = x - cc
    return a + b / den - d * x, -b / den**2 - d, 2.0 * b / den**3


def refractive_index(material: SellmeierModel, wavelength_um):
    """n(lambda) for a wavelength in microns (scalar or array)."""
    lam = np.asarray(wavelength_um, dtype=float)
    material.check_range(lam)
    f, _, _ = _n2_and_derivs(material, lam * lam)
    n = np.sqrt(f)
    return float(n) if n.ndim == 0 else n


def _index_omega_derivs(material: SellmeierModel, omega):
    """n, dn/domega, d2n/domega2 at angular frequency omega [rad/s]."""
    omega = np.asarray(omega, dtype=float)
    lam = _TWO_PI_C_UM / omega
    material.check_range(lam)
    x = lam * lam
    f, f1, f2 = _n2_and_derivs(material, x)
    n = np.sqrt(f)
    n_x = f1 / (2.0 * n)
    n_xx = f2 / (2.0 * n) - f1**2 / (4.0 * n**3)
    x_w = -2.0 * x / omega
    x_ww = 6.0 * x / omega**2
    return n, n_x * x_w, n_xx * x_w**2 + n_x * x_ww


def extraordinary_index(crystal: UniaxialCrystal, theta: float, wavelength_um):
    """Index of the extraordinary wave travelling at ``theta`` to the optic axis."""
    lam = np.asarray(wavelength_um, dtype=float)
    n_o = refractive_index(crystal.ordinary, lam)
    n_e = refractive_index(crystal.extraordinary, lam)
    ct, st = math.cos(theta), math.sin(theta)
    # endpoints returned exactly rather than through the round trip
    if st == 0.0:
        return n_o
    if ct < 1e-12:
        return n_e
    n = 1.0 / np.sqrt(ct**2 / np.asarray(n_o) ** 2 + st**2 / np.asarray(n_e) ** 2)
    return float(n) if np.ndim(n) == 0 else n


def _angled_index_omega_derivs(crystal: UniaxialCrystal, theta: float, omega):
    no, no1, no2 = _index_omega_derivs(crystal.ordinary, omega)
    ne, ne1, ne2 = _index_omega_derivs(crystal.extraordinary, omega)
    c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
    q = c2 / no**2 + s2 / ne**2
    q1 = -2.0 * (c2 * no1 / no**3 + s2 * ne1 / ne**3)
    q2 = c2 * (6.0 * no1**2 / no**4 - 2.0 * no2 / no**3) + s2 * (
        6.0 * ne1**2 / ne**4 - 2.0 * ne2 / ne**3
    )
    n = q**-0.5
    n1 = -0.5 * q**-1.5 * q1
    n2 = 0.75 * q**-2.5 * q1**2 - 0.5 * q**-1.5 * q2
    return n, n1, n2


Medium = Union[SellmeierModel, UniaxialCrystal]


def _medium_derivs(material: Medium, theta: Optional[float], omega):
    if isinstance(material, UniaxialCrystal):
        if theta is None:
            return _index_omega_derivs(material.ordinary, omega)
        return _angled_index_omega_derivs(material, theta, omega)
    if theta is not None:
        raise ValueError(f"{material.name} is isotropic; theta must be None")
    return _index_omega_derivs(material, omega)


def wavenumber(material: Medium, theta: Optional[float], omega):
    """k(omega) = n(omega) omega / c in rad/m; arrays welcome.

    For a crystal, ``theta=None`` selects the ordinary wave and a number selects
    the extraordinary wave at that angle.
    """
    n, _, _ = _medium_derivs(material, theta, omega)
    return n * np.asarray(omega, dtype=float) / SPEED_OF_LIGHT


def wavenumber_derivatives(material: Medium, theta: Optional[float], omega: float) -> DispersionSample:
    n, n1, n2 = _medium_derivs(material, theta, omega)
    w = float(omega)
    k = float(n) * w / SPEED_OF_LIGHT
    k1 = float(n + w * n1) / SPEED_OF_LIGHT
    k2 = float(2.0 * n1 + w * n2) / SPEED_OF_LIGHT
    return DispersionSample(k=k, k_prime=k1, k_double_prime=k2)


def gvd_finite_difference(material: Medium, theta: Optional[float], omega: float,
                          step: float = None, rtol: float = 1e-4, max_halvings: int = 30) -> float:
    """k'' by second-order central differences, halving the step until converged.

    Used to cross-check the analytic path.
    """
    h = step if step is not None else 1e-2 * omega
    prev = None
    for _ in range(max_halvings):
        k = wavenumber(material, theta, np.array([omega - h, omega, omega + h]))
        est = (k[2] - 2.0 * k[1] + k[0]) / h**2
        if prev is not None and abs(est - prev) <= rtol * abs(est):
            return float(est)
        prev = est
        h /= 2.0
    raise ArithmeticError(f"finite-difference k'' did not converge for {material.name}")


def solve_phase_matching_angle(crystal: UniaxialCrystal, pump_wavelength_um: float,
                               tolerance: float = 1e-6) -> float:
    """Type-I degenerate collinear angle: n_e(theta, l_p) = n_o(2 l_p).

    Bisection over [0, pi/2]; the result leaves a pump/down-converted mismatch
    below ``tolerance`` rad over the crystal length.
    """
    lp = float(pump_wavelength_um)
    omega_p = _TWO_PI_C_UM / lp
    k_signal = 2.0 * float(wavenumber(crystal, None, omega_p / 2))

    def mismatch(theta):
        return (float(wavenumber(crystal, theta, omega_p)) - k_signal) * crystal.length

    lo, hi = 0.0, math.pi / 2
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise PhaseMatchingError(
            f"no phase-matching solution for {crystal.name} at pump {lp * 1e3:.1f} nm"
        )
    theta = bisect(mismatch, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    if abs(mismatch(theta)) >= tolerance:
        raise PhaseMatchingError(
            f"bisection stalled at |delta| = {abs(mismatch(theta)):.2e} rad for {crystal.name}"
        )
    return float(theta)


def omega_from_wavelength(wavelength_um):
    return _TWO_PI_C_UM / np.asarray(wavelength_um, dtype=float)


def wavelength_from_omega(omega):
    return _TWO_PI_C_UM / np.asarray(omega, dtype=float)
