"""SVG line plots. CSVs are the ground truth; these are for eyes only."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no date stamp: the same data gives the same SVG text
matplotlib.rcParams["svg.hashsalt"] = "su11spec"
_SAVE = {"format": "svg", "metadata": {"Date": None}}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def plot_spectra(path, curves, title=""):
    """Overlay of ``(label, Spectrum)`` curves, each scaled to unit peak."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, spectrum in curves:
        top = spectrum.density.max()
        ax.plot(spectrum.frequency_thz, spectrum.density / top if top > 0 else spectrum.density, lw=1.2, label=label)
    ax.set_xlabel("frequency (THz)")
    ax.set_ylabel("photon-number density (peak = 1)")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_gvd_sweep(path, rows, show_band=True):
    ok = [r for r in rows if not r.error]
    x = np.array([r.k_double_prime_d for r in ok])
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(9.0, 3.8))
    for ax, mean, std, best, label in (
        (a1, "fwhm_mean", "fwhm_std", "fwhm_constructive", "FWHM (THz)"),
        (a2, "g2_mean", "g2_std", "g2_constructive", "g$^{(2)}$"),
    ):
        m = np.array([getattr(r, mean) for r in ok])
        s = np.array([getattr(r, std) for r in ok])
        ax.plot(x, m, "o-", color="k", label="phase average")
        if show_band:
            ax.fill_between(x, m - s, m + s, color="tab:pink", alpha=0.4, lw=0, label=r"$\pm1\sigma$")
        ax.plot(x, [getattr(r, best) for r in ok], "--", color="tab:red", label="constructive phase")
        ax.set_xlabel(r"$k''d$ round trip (ps$^2$)")
        ax.set_ylabel(label)
    a1.legend(frameon=False)
    return _save(fig, path)


def plot_delay_waterfall(path, rows):
    """Convolved spectra stacked by pump delay, each scaled to its own peak."""
    fig, ax = plt.subplots(figsize=(6.4, 1.2 + 1.1 * max(len(rows), 1)))
    for k, row in enumerate(rows):
        s = row.convolved
        top = s.density.max()
        ax.plot(s.frequency_thz, s.density / top + 1.2 * k, lw=1.0, color="k")
        ax.text(s.frequency_thz[0], 1.2 * k + 0.6, f"{row.delta_L_p:.2f} mm (x{1 / top:.2g})", fontsize=8)
    ax.set_xlabel("frequency (THz)")
    ax.set_yticks([])
    ax.set_ylabel("photon-number density (offset)")
    return _save(fig, path)


def plot_gain_study(path, rows):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    gains = [r.gain for r in rows]
    ax.plot(gains, [r.K for r in rows], "o-", color="k")
    ax.axhline(1.0, color="0.6", lw=0.8)
    if len(gains) > 1 and min(gains) > 0 and max(gains) / min(gains) > 100:
        ax.set_xscale("log")
    ax.set_xlabel("parametric gain G")
    ax.set_ylabel("effective mode number K")
    ax.set_ylim(bottom=0.9)
    return _save(fig, path)
