import math

import numpy as np
import pytest

from su11spec import dispersion, jsa, modes
from su11spec.observables import fwhm, Spectrum


def test_center_mismatch_zero(small):
    delta = jsa.crystal_mismatch_at(small, small.pump.omega / 2, small.pump.omega / 2)
    assert abs(delta) < 1e-6


def test_crystal_mismatch_symmetric(small):
    delta = jsa.crystal_mismatch(small)
    assert np.max(np.abs(delta - delta.T)) <= 1e-12 * np.max(np.abs(delta))


def test_crystal_mismatch_quadratic_near_degeneracy(small):
    w0 = small.pump.omega / 2
    omega = np.linspace(-3e13, 3e13, 41)
    delta = jsa.crystal_mismatch_at(small, w0 + omega, w0 - omega)
    c2, c1, c0 = np.polyfit(omega, delta, 2)
    span = omega.max()
    assert abs(c1 * span) < 0.01 * abs(c2 * span**2)


def test_zero_gap_delta_prime_vanishes(zero_gap):
    assert np.max(np.abs(jsa.gap_mismatch(zero_gap))) == 0.0


def test_drift_phase_shift(small):
    a = jsa.gap_mismatch(small)
    b = jsa.gap_mismatch(small.evolve(pump__drift_phase_rad=math.pi))
    assert np.max(np.abs((b - a) + math.pi)) < 1e-9


def test_gap_curvature_matches_gvd(baseline):
    cfg = baseline.evolve(pump__timing="gap")
    w0 = cfg.pump.omega / 2
    omega = np.linspace(-2e12, 2e12, 21)
    dp = jsa.gap_mismatch_at(cfg, w0 + omega, w0 + omega)
    c2 = np.polyfit(omega, dp, 2)[0]
    kpp = dispersion.wavenumber_derivatives(dispersion.get_material("SF6"), None, w0).k_double_prime
    assert c2 == pytest.approx(-kpp * 2 * 0.183, rel=0.05)


def test_unnormalized_center_is_one(zero_gap):
    w0 = zero_gap.pump.omega / 2
    assert jsa.jsa_values(zero_gap, w0, w0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("fixture", ["small", "zero_gap"])
def test_normalization_and_exchange(request, fixture):
    cfg = request.getfixturevalue(fixture)
    F = jsa.build_jsa(cfg)
    assert F.shape == (cfg.grid.n_points,) * 2
    assert np.sum(np.abs(F.values) ** 2) == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(F.values - F.values.T)) < 1e-10


def test_phase_periodicity(small):
    a = jsa.build_jsa(small.evolve(pump__drift_phase_rad=0.3)).values
    b = jsa.build_jsa(small.evolve(pump__drift_phase_rad=0.3 + 2 * math.pi)).values
    assert np.max(np.abs(a - b)) < 1e-12
    c = jsa.build_jsa(small.evolve(pump__drift_phase_rad=0.3 + 1e-6)).values
    assert np.max(np.abs(a - c)) < 1e-5


def test_gaussian_along_antidiagonal(zero_gap):
    cfg = zero_gap
    w0 = cfg.pump.omega / 2
    s = np.linspace(-3e12, 3e12, 13)  # sum detuning
    omega = 5e12
    F = jsa.jsa_values(cfg, w0 + omega + s / 2, w0 - omega + s / 2)
    envelope = np.exp(-s**2 / (4 * cfg.pump.bandwidth**2))
    assert np.allclose(np.abs(jsa.pump_envelope(cfg, w0 + omega + s / 2, w0 - omega + s / 2)), envelope,
                       rtol=1e-12)
    assert np.all(np.abs(F) <= envelope + 1e-15)


def test_single_crystal_real_nonnegative_magnitude(small):
    F = jsa.build_single_crystal_jsa(small)
    assert np.allclose(F.values.imag, 0.0)
    assert np.all(np.abs(F.values) >= 0)


def test_single_crystal_marginal_tens_of_thz(baseline):
    cfg = baseline.evolve(run__n_points=512, run__half_span_thz=90.0)
    F = jsa.build_single_crystal_jsa(cfg)
    marginal = np.sum(np.abs(F.values) ** 2, axis=1)
    width = fwhm(Spectrum(cfg.grid.omega, marginal)).width_thz
    assert 10.0 < width < 150.0


def test_delay_tilts_phase_across_ridge(baseline):
    # the pump delay enters through the pump frequency only: d(delta')/d(wp) grows by dL/c
    a = baseline.evolve(pump__timing="gap")
    b = a.evolve(pump__path_offset_mm=1.40)
    w0 = a.pump.omega / 2
    h = 1e11
    slope = [(jsa.gap_mismatch_at(c, w0 + h, w0) - jsa.gap_mismatch_at(c, w0 - h, w0)) / (2 * h) for c in (a, b)]
    assert slope[1] - slope[0] == pytest.approx(1.40e-3 / 299792458.0, rel=1e-6)


def test_zero_gap_equals_double_length(zero_gap):
    double = zero_gap.evolve(crystal__length_mm=2 * zero_gap.crystal.length_mm)
    a = jsa.build_jsa(zero_gap).values
    b = jsa.build_single_crystal_jsa(double, propagation_phase=True).values
    assert np.max(np.abs(a - b)) < 1e-10
    # magnitudes agree without the propagation phase too
    c = jsa.build_single_crystal_jsa(double).values
    assert np.max(np.abs(np.abs(a) - np.abs(c))) < 1e-10


def test_range_error_has_grid_context(baseline):
    cfg = baseline.evolve(run__n_points=64, run__half_span_thz=400.0)
    with pytest.raises(dispersion.MaterialRangeError, match="grid spans"):
        jsa.build_jsa(cfg)


def test_save_load_round_trip(tmp_path, small):
    F = jsa.build_jsa(small)
    jsa.save_jsa(tmp_path / "f.npz", F)
    G = jsa.load_jsa(tmp_path / "f.npz")
    assert G.grid == F.grid and G.norm == F.norm
    assert np.array_equal(G.values, F.values)
