"""Batch computations: GVD sweep with phase averaging, pump-delay scan, gain study.

Every row runs the full chain jsa -> Schmidt modes -> high-gain weights ->
spectrum/observables.

Two couplings appear. ``coupling`` multiplies sqrt(lambda_k) of the normalized
JSA of one configuration. ``pump_coupling`` multiplies the singular values of
the unnormalized JSA, so it stands for a fixed pump power: a configuration
whose amplitudes interfere away gets less gain. It is set from the quoted gain
at a reference configuration and held while the drift phase or the pump delay
varies; the per-configuration coupling is then pump_coupling * jsa_norm.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import modes, observables
from .config import InterferometerConfig
from .jsa import build_jsa, build_single_crystal_jsa


class ScenarioError(RuntimeError):
    pass


@dataclass(frozen=True)
class PipelineResult:
    config: InterferometerConfig
    decomposition: modes.SchmidtDecomposition
    high_gain: modes.HighGainWeights
    spectrum: observables.Spectrum
    width: observables.Fwhm
    coherence: observables.CoherenceReport

    @property
    def coupling(self) -> float:
        return self.high_gain.coupling


def decompose(config: InterferometerConfig) -> modes.SchmidtDecomposition:
    return modes.schmidt_decompose(build_jsa(config), config.run.rank_tolerance)


def pump_coupling_for_gain(decomposition: modes.SchmidtDecomposition, gain: float, convention: str) -> float:
    """Pump coupling that gives the quoted gain for this decomposition."""
    return modes.coupling_for_gain(decomposition, gain, convention) / decomposition.jsa_norm


def run_pipeline(config: InterferometerConfig, coupling: Optional[float] = None,
                 decomposition: Optional[modes.SchmidtDecomposition] = None,
                 pump_coupling: Optional[float] = None) -> PipelineResult:
    """Full chain for one configuration.

    Pass at most one of ``coupling`` and ``pump_coupling``; with neither, the
    quoted gain of ``config`` applies to this configuration itself.
    """
    if coupling is not None and pump_coupling is not None:
        raise ValueError("give coupling or pump_coupling, not both")
    dec = decomposition if decomposition is not None else decompose(config)
    if pump_coupling is not None:
        coupling = pump_coupling * dec.jsa_norm
    if coupling is None:
        coupling = modes.coupling_for_gain(dec, config.gain, config.run.gain_convention)
    hg = modes.reweight_high_gain(dec.weights, coupling)
    spectrum = modes.synthesize_spectrum(dec, hg)
    return PipelineResult(
        config=config,
        decomposition=dec,
        high_gain=hg,
        spectrum=spectrum,
        width=observables.fwhm(spectrum),
        coherence=observables.coherence(hg.lambda_tilde),
    )


def run_single_crystal(config: InterferometerConfig, coupling: Optional[float] = None) -> PipelineResult:
    """The same chain for the first crystal alone (no gap, no second crystal)."""
    jsa = build_single_crystal_jsa(config)
    dec = modes.schmidt_decompose(jsa, config.run.rank_tolerance)
    return run_pipeline(config, coupling, decomposition=dec)


def degenerate_density(decomposition: modes.SchmidtDecomposition, coupling: float) -> float:
    """Photon-number density at w_p/2 (mean of the two samples straddling it)."""
    n = decomposition.grid.n_points
    photons = modes.reweight_high_gain(decomposition.weights, coupling).photon_numbers
    central = np.abs(decomposition.signal_modes[:, n // 2 - 1: n // 2 + 1]) ** 2
    return float(photons @ central.mean(axis=1)) / decomposition.grid.step


@dataclass(frozen=True)
class ConstructivePhase:
    phase: float
    coupling: float  # per-configuration coupling at ``phase``
    pump_coupling: float
    evaluations: int


def _golden_max(f, lo, hi, tol):
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1, x2 = b - inv * (b - a), a + inv * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv * (b - a)
            f2 = f(x2)
    return x1 if f1 >= f2 else x2


def find_constructive_phase(config: InterferometerConfig, n_coarse: int = 16, tol: float = 1e-3,
                            max_iterations: int = 6) -> ConstructivePhase:
    """Drift phase maximizing the spectral density at degeneracy at fixed pump power.

    Coarse scan over ``n_coarse`` phases, then golden-section refinement inside
    the neighbouring coarse cells. The quoted gain is pinned to the phase
    found, so scan and refinement repeat until the pump coupling settles.
    """
    cache = {}

    def dec(phi):
        key = float(phi)
        if key not in cache:
            cache[key] = decompose(config.evolve(pump__drift_phase_rad=key))
        return cache[key]

    cell = 2.0 * math.pi / n_coarse
    coarse = [k * cell for k in range(n_coarse)]
    convention = config.run.gain_convention

    def density(phi, pump):
        d = dec(phi)
        return degenerate_density(d, pump * d.jsa_norm)

    pump = pump_coupling_for_gain(dec(coarse[0]), config.gain, convention)
    phase = coarse[0]
    for _ in range(max_iterations):
        values = [density(p, pump) for p in coarse]
        p0 = coarse[int(np.argmax(values))]
        phase = _golden_max(lambda p: density(p, pump), p0 - cell, p0 + cell, tol)
        new = pump_coupling_for_gain(dec(phase), config.gain, convention)
        settled = abs(new - pump) <= 1e-6 * pump
        pump = new
        if settled:
            break
    return ConstructivePhase(
        phase=float(phase % (2.0 * math.pi)),
        coupling=float(pump * dec(phase).jsa_norm),
        pump_coupling=float(pump),
        evaluations=len(cache),
    )


def default_phases(n: int) -> list:
    return [2.0 * math.pi * k / n for k in range(n)]


@dataclass(frozen=True)
class PhaseAverage:
    phases: tuple
    fwhm_thz: tuple
    g2: tuple
    K: tuple
    pump_coupling: float

    @staticmethod
    def _stats(values):
        arr = np.asarray(values, dtype=float)
        std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
        return float(np.mean(arr)), std

    @property
    def fwhm_mean(self):
        return self._stats(self.fwhm_thz)[0]

    @property
    def fwhm_std(self):
        return self._stats(self.fwhm_thz)[1]

    @property
    def g2_mean(self):
        return self._stats(self.g2)[0]

    @property
    def g2_std(self):
        return self._stats(self.g2)[1]


def _phase_job(args):
    config, phase, pump = args
    try:
        res = run_pipeline(config.evolve(pump__drift_phase_rad=phase), pump_coupling=pump)
    except Exception as exc:
        raise ScenarioError(f"drift phase {phase:.6f} rad: {exc}") from exc
    return res.width.width_thz, res.coherence.g2, res.coherence.K


def _map(fn, items, jobs):
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def run_phase_average(config: InterferometerConfig, phases=None, pump_coupling: Optional[float] = None,
                      jobs: int = 1) -> PhaseAverage:
    """Mean and sample standard deviation of FWHM and g2 over drift phases at fixed pump power.

    Without an explicit ``pump_coupling`` the quoted gain applies to the config as given.
    """
    phases = list(default_phases(config.run.phases) if phases is None else phases)
    if not phases:
        raise ValueError("no phases given")
    if pump_coupling is None:
        pump_coupling = pump_coupling_for_gain(decompose(config), config.gain, config.run.gain_convention)
    out = _map(_phase_job, [(config, float(p), pump_coupling) for p in phases], jobs)
    return PhaseAverage(
        phases=tuple(float(p) for p in phases),
        fwhm_thz=tuple(o[0] for o in out),
        g2=tuple(o[1] for o in out),
        K=tuple(o[2] for o in out),
        pump_coupling=float(pump_coupling),
    )


@dataclass(frozen=True)
class GvdSweepRow:
    name: str
    k_double_prime_d: float  # ps^2, round trip
    fwhm_mean: float = float("nan")
    fwhm_std: float = float("nan")
    g2_mean: float = float("nan")
    g2_std: float = float("nan")
    fwhm_constructive: float = float("nan")
    g2_constructive: float = float("nan")
    K_constructive: float = float("nan")
    phase_constructive: float = float("nan")
    coupling: float = float("nan")  # at the constructive phase
    error: str = ""


def _sweep_job(args):
    name, config, phases = args
    kd = config.gvd_parameter * 1e24
    try:
        cons = find_constructive_phase(config)
        best = run_pipeline(config.evolve(pump__drift_phase_rad=cons.phase), cons.coupling)
        avg = run_phase_average(config, phases, pump_coupling=cons.pump_coupling)
    except Exception as exc:  # the sweep carries on past a failed row
        return GvdSweepRow(name=name, k_double_prime_d=kd, error=f"{type(exc).__name__}: {exc}")
    return GvdSweepRow(
        name=name,
        k_double_prime_d=kd,
        fwhm_mean=avg.fwhm_mean,
        fwhm_std=avg.fwhm_std,
        g2_mean=avg.g2_mean,
        g2_std=avg.g2_std,
        fwhm_constructive=best.width.width_thz,
        g2_constructive=best.coherence.g2,
        K_constructive=best.coherence.K,
        phase_constructive=cons.phase,
        coupling=cons.coupling,
    )


def run_gvd_sweep(base_config: InterferometerConfig, rod_sets, phases=None, jobs: int = 1) -> list:
    """One row per ``(name, rods)`` entry, sorted by round-trip k''d."""
    phases = list(default_phases(base_config.run.phases) if phases is None else phases)
    jobs_in = [(name, base_config.evolve(gap__rods=tuple(rods)), phases) for name, rods in rod_sets]
    rows = _map(_sweep_job, jobs_in, jobs)
    return sorted(rows, key=lambda r: r.k_double_prime_d)


@dataclass(frozen=True)
class DelayScanRow:
    delta_L_p: float  # mm
    peak_frequencies: tuple  # THz, tallest first
    peak_heights: tuple
    fwhm_per_peak: tuple  # THz
    spectrum: observables.Spectrum = field(repr=False, compare=False)
    convolved: observables.Spectrum = field(repr=False, compare=False)


def _delay_job(args):
    config, delay, pump, min_prominence = args
    cfg = config.evolve(pump__path_offset_mm=float(delay))
    res = run_pipeline(cfg, pump_coupling=pump)
    conv = observables.convolve_spectrometer(res.spectrum, cfg.run.spectrometer_resolution_nm)
    peaks = observables.find_peaks(conv, min_prominence)
    return DelayScanRow(
        delta_L_p=float(delay),
        peak_frequencies=tuple(p.frequency_thz for p in peaks),
        peak_heights=tuple(p.height for p in peaks),
        fwhm_per_peak=tuple(observables.peak_width(conv, p) for p in peaks),
        spectrum=res.spectrum,
        convolved=conv,
    )


def run_delay_scan(base_config: InterferometerConfig, delays, jobs: int = 1,
                   min_prominence: float = 0.1) -> list:
    """Spectra versus extra one-way pump path [mm] at fixed pump power.

    The pump coupling is set by the quoted gain at zero path offset.
    """
    reference = base_config.evolve(pump__path_offset_mm=0.0)
    pump = pump_coupling_for_gain(decompose(reference), reference.gain, reference.run.gain_convention)
    return _map(_delay_job, [(base_config, d, pump, min_prominence) for d in delays], jobs)


@dataclass(frozen=True)
class GainStudyRow:
    gain: float
    K: float
    g2: float
    fwhm_thz: float
    phase_constructive: float
    coupling: float


def _gain_job(args):
    config, gain = args
    cfg = config.evolve(run__gain=float(gain))
    cons = find_constructive_phase(cfg)
    res = run_pipeline(cfg.evolve(pump__drift_phase_rad=cons.phase), cons.coupling)
    return GainStudyRow(
        gain=float(gain),
        K=res.coherence.K,
        g2=res.coherence.g2,
        fwhm_thz=res.width.width_thz,
        phase_constructive=cons.phase,
        coupling=cons.coupling,
    )


def run_gain_study(base_config: InterferometerConfig, gains, jobs: int = 1) -> list:
    """Constructive-phase K and g2 for each gain."""
    for g in gains:
        if not g > 0:
            raise ValueError(f"gains must be > 0, got {g}")
    return _map(_gain_job, [(base_config, g) for g in gains], jobs)
