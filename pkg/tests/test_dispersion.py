import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from su11spec import dispersion as d


def test_bk7_catalog_nd():
    # Schott BK7 coefficients, evaluated by hand at the helium d line
    B = (1.03961212, 0.231792344, 1.01046945)
    C = (0.00600069867, 0.0200179144, 103.560653)
    lam2 = 0.5876**2
    oracle = math.sqrt(1 + sum(b * lam2 / (lam2 - c) for b, c in zip(B, C)))
    n = float(d.refractive_index(d.get_material("BK7"), 0.5876))
    assert n == pytest.approx(oracle, abs=1e-12)
    assert n == pytest.approx(1.5168, abs=2e-4)


@pytest.mark.parametrize("name,nd", [("SF6", 1.80518), ("SF57", 1.84666), ("LLF1", 1.54814)])
def test_glass_nd(name, nd):
    assert float(d.refractive_index(d.get_material(name), 0.5876)) == pytest.approx(nd, abs=2e-4)


def test_bbo_ordinary_800():
    oracle = math.sqrt(2.7359 + 0.01878 / (0.64 - 0.01822) - 0.01354 * 0.64)
    n = float(d.refractive_index(d.get_material("BBO_o"), 0.8))
    assert n == pytest.approx(oracle, rel=1e-13)
    assert n == pytest.approx(1.661, abs=2e-3)


def test_out_of_range_names_material():
    with pytest.raises(d.MaterialRangeError, match="SF6"):
        d.refractive_index(d.get_material("SF6"), 0.1)


def test_unknown_material_and_form():
    with pytest.raises(d.MaterialError):
        d.get_material("SF99")
    text = 'name = "X"\nform = "laurent"\ncoefficients = []\nvalid_range_um = [0.3, 1.0]\nsource = "x"\nversion = "1"\n'
    with pytest.raises(d.MaterialError):
        d.parse_material(text)


def test_materials_dir_override(tmp_path, monkeypatch):
    (tmp_path / "UNIT.toml").write_text(
        'name = "UNIT"\nform = "vacuum"\ncoefficients = []\nvalid_range_um = [0.1, 10.0]\n'
        'source = "test"\nversion = "t"\n'
    )
    monkeypatch.setenv(d.MATERIALS_ENV, str(tmp_path))
    assert d.get_material("UNIT").form == "vacuum"


@pytest.fixture(scope="module")
def bbo():
    return d.get_crystal("BBO", 3e-3)


def test_extraordinary_endpoints(bbo):
    lam = 0.4
    assert d.extraordinary_index(bbo, 0.0, lam) == d.refractive_index(bbo.ordinary, lam)
    assert d.extraordinary_index(bbo, math.pi / 2, lam) == d.refractive_index(bbo.extraordinary, lam)
    mid = d.extraordinary_index(bbo, math.pi / 4, lam)
    ne, no = d.refractive_index(bbo.extraordinary, lam), d.refractive_index(bbo.ordinary, lam)
    assert min(ne, no) < mid < max(ne, no)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, math.pi / 2), st.floats(0.0, math.pi / 2))
def test_extraordinary_monotone_in_theta(bbo, a, b):
    lo, hi = sorted((a, b))
    # BBO is negative uniaxial: n_e(theta) falls from n_o towards n_e
    assert d.extraordinary_index(bbo, hi, 0.4) <= d.extraordinary_index(bbo, lo, 0.4) + 1e-15


def test_sf6_gvd_800():
    w = float(d.omega_from_wavelength(0.8))
    kpp = d.wavenumber_derivatives(d.get_material("SF6"), None, w).k_double_prime
    assert 0.15 <= kpp * 1e24 <= 0.25  # ps^2/m
    # round-trip 18.3 cm rod
    assert kpp * 0.366 * 1e24 == pytest.approx(0.0728, rel=0.01)


def test_vacuum_gvd_zero():
    s = d.wavenumber_derivatives(d.get_material("vacuum"), None, 2.0e15)
    assert s.k_double_prime == 0.0
    assert s.k == pytest.approx(2.0e15 / 299792458.0, rel=1e-15)


@pytest.mark.parametrize("name", ["SF6", "SF57", "LLF1", "BK7", "BBO_o", "BBO_e"])
def test_analytic_gvd_matches_finite_difference(name):
    m = d.get_material(name)
    lo, hi = m.valid_range
    for lam in np.linspace(lo * 1.05, hi * 0.95, 7):
        w = float(d.omega_from_wavelength(lam))
        analytic = d.wavenumber_derivatives(m, None, w).k_double_prime
        fd = d.gvd_finite_difference(m, None, w)
        assert analytic == pytest.approx(fd, rel=1e-4, abs=1e-31)


def test_angled_gvd_matches_finite_difference(bbo):
    w = float(d.omega_from_wavelength(0.4))
    theta = 0.5
    assert d.wavenumber_derivatives(bbo, theta, w).k_double_prime == pytest.approx(
        d.gvd_finite_difference(bbo, theta, w), rel=1e-4)


def test_derivatives_deterministic():
    m = d.get_material("SF57")
    a = d.wavenumber_derivatives(m, None, 2.3e15)
    b = d.wavenumber_derivatives(m, None, 2.3e15)
    assert a == b
    assert a.k > 0 and np.isfinite([a.k, a.k_prime, a.k_double_prime]).all()


def test_phase_matching_bbo_400(bbo):
    theta = d.solve_phase_matching_angle(bbo, 0.4)
    assert math.degrees(theta) == pytest.approx(29.0, abs=1.0)
    wp = float(d.omega_from_wavelength(0.4))
    delta = (d.wavenumber(bbo, theta, wp) - 2 * d.wavenumber(bbo, None, wp / 2)) * bbo.length
    assert abs(delta) < 1e-6


def test_phase_matching_no_solution():
    # no birefringence: normal dispersion keeps the mismatch one-signed
    glass = d.get_material("BK7")
    isotropic = d.UniaxialCrystal("BK7-rod", glass, glass, 3e-3, 0.0)
    with pytest.raises(d.PhaseMatchingError, match="no phase-matching solution"):
        d.solve_phase_matching_angle(isotropic, 0.4)
