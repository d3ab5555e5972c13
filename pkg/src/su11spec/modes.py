"""Schmidt decomposition of a joint spectral amplitude and high-gain reweighting.

Mode samples carry the grid measure: ``signal_modes[k]`` is the discrete
vector whose squared moduli sum to one, so the same arrays satisfy
orthonormality and ``F = sum_k sqrt(lambda_k) u_k v_k^T``. Divide by
``grid.step`` to get a density per rad/s.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import FrequencyGrid
from .jsa import JointSpectralAmplitude
from .observables import Spectrum

DEGENERACY_RTOL = 1e-9


class SchmidtError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SchmidtDecomposition:
    weights: np.ndarray  # lambda_k, descending
    signal_modes: np.ndarray  # (rank, n) rows u_k
    idler_modes: np.ndarray  # (rank, n) rows v_k
    discarded_mass: float
    grid: FrequencyGrid
    jsa_norm: float = 1.0  # norm of the JSA before normalization, for fixed-pump comparisons

    @property
    def truncation_rank(self) -> int:
        return len(self.weights)

    @property
    def singular_values(self) -> np.ndarray:
        return np.sqrt(self.weights)

    def reconstruct(self) -> np.ndarray:
        return (self.signal_modes.T * self.singular_values) @ self.idler_modes

    def schmidt_number(self) -> float:
        return float(1.0 / np.sum(self.weights**2))


@dataclass(frozen=True)
class HighGainWeights:
    lambda_tilde: np.ndarray
    total_photon_scale: float  # sum_k sinh^2(G sqrt(lambda_k))
    coupling: float  # the G that multiplied sqrt(lambda_k)

    @property
    def photon_numbers(self) -> np.ndarray:
        return self.lambda_tilde * self.total_photon_scale


def _fix_gauge(u, vh, s, grid_size):
    """Deterministic modes: rotate degenerate clusters, then fix each phase."""
    reflection = np.arange(grid_size)[::-1]
    k = 0
    while k < len(s):
        end = k + 1
        while end < len(s) and s[k] - s[end] <= DEGENERACY_RTOL * max(s[k], 1e-300):
            end += 1
        if end - k > 1:
            # diagonalize the overlap with the reflection w -> 2 w0 - w inside the
            # cluster (symmetric/antisymmetric for reflection-invariant pairs)
            block = u[:, k:end]
            overlap = block.conj().T @ block[reflection, :]
            overlap = 0.5 * (overlap + overlap.conj().T)
            evals, rot = np.linalg.eigh(overlap)
            rot = rot[:, np.argsort(-evals, kind="stable")]
            u[:, k:end] = block @ rot
            vh[k:end, :] = rot.conj().T @ vh[k:end, :]
        k = end
    for j in range(len(s)):
        col = u[:, j]
        mags = np.abs(col)
        first = int(np.argmax(mags > 1e-3 * mags.max()))
        phase = col[first] / mags[first]
        u[:, j] = col / phase
        vh[j, :] = vh[j, :] * phase
    return u, vh


def schmidt_decompose(jsa: JointSpectralAmplitude, rank_tolerance: float = 1e-14) -> SchmidtDecomposition:
    """Dense SVD of the normalized JSA, truncated where lambda_k < rank_tolerance.

    The first sample of each signal mode exceeding 1e-3 of its peak modulus is
    made real and positive; the idler mode absorbs the conjugate phase.
    """
    values = np.asarray(jsa.values)
    try:
        u, s, vh = np.linalg.svd(values)
    except np.linalg.LinAlgError as exc:
        raise SchmidtError(
            f"SVD failed ({exc}); matrix {values.shape}, finite={np.isfinite(values).all()}, "
            f"norm={np.linalg.norm(values):.3e}"
        ) from None
    weights = s**2
    keep = int(np.count_nonzero(weights >= rank_tolerance)) or 1
    u, vh = _fix_gauge(u[:, :keep].copy(), vh[:keep, :].copy(), s[:keep], values.shape[0])
    return SchmidtDecomposition(
        weights=weights[:keep],
        signal_modes=np.ascontiguousarray(u.T),
        idler_modes=np.ascontiguousarray(vh),
        discarded_mass=float(np.sum(weights[keep:])),
        grid=jsa.grid,
        jsa_norm=float(jsa.norm),
    )


def _log_sinh2(x):
    """log sinh^2(x) for x >= 0, stable for large x."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -np.inf)
    pos = x > 0
    big = x > 20.0
    mid = pos & ~big
    out[mid] = 2.0 * np.log(np.sinh(x[mid]))
    xb = x[big]
    out[big] = 2.0 * (xb + np.log1p(-np.exp(-2.0 * xb)) - np.log(2.0))
    return out


def reweight_high_gain(weights, gain: float) -> HighGainWeights:
    """lambda~_k = sinh^2(G sqrt(lambda_k)) / sum_j sinh^2(G sqrt(lambda_j))."""
    if not gain > 0:
        raise ValueError(f"gain must be > 0, got {gain}")
    lam = np.asarray(weights, dtype=float)
    if lam.size == 0:
        raise ValueError("no Schmidt weights")
    logs = _log_sinh2(gain * np.sqrt(np.clip(lam, 0.0, None)))
    top = np.max(logs)
    rel = np.exp(logs - top)
    total = np.sum(rel)
    return HighGainWeights(
        lambda_tilde=rel / total,
        total_photon_scale=float(np.exp(top) * total),
        coupling=float(gain),
    )


def coupling_for_gain(decomposition: SchmidtDecomposition, gain: float, convention: str) -> float:
    """Coupling that multiplies sqrt(lambda_k) for a quoted parametric gain.

    ``dominant_mode``: the quoted gain is that of the strongest Schmidt mode,
    so its photon number is sinh^2(gain). ``coupling``: used as is.
    """
    if convention == "coupling":
        return float(gain)
    if convention == "dominant_mode":
        return float(gain / np.sqrt(decomposition.weights[0]))
    raise ValueError(f"unknown gain convention {convention!r}")


def synthesize_spectrum(decomposition: SchmidtDecomposition, high_gain: HighGainWeights,
                        side: str = "signal") -> Spectrum:
    """Photon-number density per rad/s, summing |u_k|^2 with the high-gain weights."""
    if side == "signal":
        modes = decomposition.signal_modes
    elif side == "idler":
        modes = decomposition.idler_modes
    else:
        raise ValueError(f"side must be 'signal' or 'idler', got {side!r}")
    if len(modes) == 0 or len(high_gain.lambda_tilde) != len(modes):
        raise ValueError(f"{side}: {len(modes)} modes for {len(high_gain.lambda_tilde)} weights")
    density = (high_gain.lambda_tilde @ np.abs(modes) ** 2) * high_gain.total_photon_scale
    return Spectrum(omega=decomposition.grid.omega.copy(), density=density / decomposition.grid.step)


def save_modes(directory, decomposition: SchmidtDecomposition, high_gain: HighGainWeights,
               n_modes: int = 10) -> list:
    """Per-mode CSVs (omega, Re u, Im u) plus a weights table; returns the paths."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    path = directory / "weights.csv"
    with open(path, "w", newline="") as fh:
        fh.write("k,lambda,lambda_tilde\n")
        for k, (lam, lt) in enumerate(zip(decomposition.weights, high_gain.lambda_tilde), start=1):
            fh.write(f"{k},{lam:.12e},{lt:.12e}\n")
    written.append(path)
    omega = decomposition.grid.omega
    for k in range(min(n_modes, decomposition.truncation_rank)):
        path = directory / f"mode_{k + 1:03d}.csv"
        with open(path, "w", newline="") as fh:
            fh.write("omega_rad_s,re_u,im_u,re_v,im_v\n")
            for w, u, v in zip(omega, decomposition.signal_modes[k], decomposition.idler_modes[k]):
                fh.write(f"{w:.12e},{u.real:.12e},{u.imag:.12e},{v.real:.12e},{v.imag:.12e}\n")
        written.append(path)
    return written
