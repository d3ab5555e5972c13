"""Command-line entry point.

    su11spec spectrum   --config baseline --out out/
    su11spec sweep-gvd  --ladder rod_ladder --phases 8
    su11spec delay-scan --delays 0,1.4,2.4 --config two_color
    su11spec gain-study --gains 7,10
    su11spec dump-jsa | dump-modes

Exit codes: 0 success, 1 pipeline or numerical error, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, dispersion, modes, outputs, plotting, scenarios
from .config import ConfigError, config_hash, load_config, load_rod_ladder, resolve_config_path
from .jsa import build_jsa, save_jsa
from .observables import convolve_spectrometer

EXIT_OK, EXIT_PIPELINE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="baseline", help="config file or shipped name (default: baseline)")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker processes (default: 1)")
    over = common.add_argument_group("overrides (applied after the config file)")
    over.add_argument("--gain", type=float)
    over.add_argument("--n-points", type=int)
    over.add_argument("--half-span-thz", type=float)
    over.add_argument("--resolution-nm", type=float, help="spectrometer FWHM in nm")

    parser = argparse.ArgumentParser(prog="su11spec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="single-crystal and interferometer spectra")
    which = p.add_mutually_exclusive_group()
    which.add_argument("--single-crystal", action="store_true", help="only the single-crystal spectrum")
    which.add_argument("--interferometer", action="store_true", help="only the interferometer spectrum")
    p.add_argument("--convolve", action=argparse.BooleanOptionalAction, default=False,
                   help="also write spectrometer-convolved spectra")
    p.add_argument("--phase", choices=("constructive", "config"), default="constructive",
                   help="interferometer drift phase: searched constructive phase or the config value")

    p = sub.add_parser("sweep-gvd", parents=[common], help="FWHM and g2 versus round-trip k''d")
    p.add_argument("--ladder", default="rod_ladder", help="rod ladder file or shipped name")
    p.add_argument("--phases", type=_positive_int, help="number of equally spaced drift phases")

    p = sub.add_parser("delay-scan", parents=[common], help="spectra versus extra pump path")
    p.add_argument("--delays", type=_float_list, default=[0.0, 1.40, 2.40], help="mm, comma separated")

    p = sub.add_parser("gain-study", parents=[common], help="constructive-phase K and g2 versus gain")
    p.add_argument("--gains", type=_float_list, default=[7.0, 10.0], help="comma separated")

    sub.add_parser("dump-jsa", parents=[common], help="write the joint spectral amplitude (.npz)")

    p = sub.add_parser("dump-modes", parents=[common], help="write Schmidt modes and weights")
    p.add_argument("--n-modes", type=_positive_int, default=10)
    return parser


def _load(args):
    try:
        path = resolve_config_path(args.config)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    config = load_config(path)
    run = {}
    if args.gain is not None:
        run["run__gain"] = args.gain
    if args.n_points is not None:
        run["run__n_points"] = args.n_points
    if args.half_span_thz is not None:
        run["run__half_span_thz"] = args.half_span_thz
    if args.resolution_nm is not None:
        run["run__spectrometer_resolution_nm"] = args.resolution_nm
    return path, (config.evolve(**run) if run else config)


def _prepare(args, command):
    path, config = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = outputs.RunManifest(
        command=command,
        config_path=str(path),
        config_hash=config_hash(config),
        output_directory=str(out),
        material_versions=outputs.material_versions(config),
    )
    return config, out, manifest


def _stem(command):
    return command.replace("-", "_")


def cmd_spectrum(args) -> int:
    config, out, manifest = _prepare(args, "spectrum")
    curves = []
    summary = {}
    if not args.interferometer:
        single = scenarios.run_single_crystal(config)
        curves.append(("single crystal", "single_crystal", single))
    if not args.single_crystal:
        if args.phase == "constructive":
            cons = scenarios.find_constructive_phase(config)
            res = scenarios.run_pipeline(config.evolve(pump__drift_phase_rad=cons.phase), cons.coupling)
        else:
            res = scenarios.run_pipeline(config)
        curves.append(("interferometer", "interferometer", res))
    for label, tag, res in curves:
        extra = {"curve": tag, "drift_phase_rad": res.config.pump.drift_phase_rad, "coupling": res.coupling}
        manifest.add(outputs.write_spectrum_csv(out / f"spectrum_{tag}.csv", res.spectrum, config, **extra))
        if args.convolve:
            conv = convolve_spectrometer(res.spectrum, config.run.spectrometer_resolution_nm)
            manifest.add(outputs.write_spectrum_csv(out / f"spectrum_{tag}_convolved.csv", conv, config, **extra))
        summary[tag] = {"K": res.coherence.K, "g2": res.coherence.g2, "fwhm_thz": res.width.width_thz,
                        "drift_phase_rad": res.config.pump.drift_phase_rad, "coupling": res.coupling}
        print(f"{label}: FWHM {res.width.width_thz:.4f} THz  K {res.coherence.K:.4f}  g2 {res.coherence.g2:.4f}")
    manifest.add(plotting.plot_spectra(out / "spectrum.svg", [(c[0], c[2].spectrum) for c in curves]))
    manifest.add(outputs.write_metadata(out / "spectrum_metadata.json", config, results=summary))
    manifest.write()
    return EXIT_OK


SWEEP_COLUMNS = ("name", "k_double_prime_d_ps2", "fwhm_mean_THz", "fwhm_std_THz", "g2_mean", "g2_std",
                 "fwhm_constructive_THz", "g2_constructive", "K_constructive", "phase_constructive_rad",
                 "coupling", "error")


def cmd_sweep_gvd(args) -> int:
    config, out, manifest = _prepare(args, "sweep-gvd")
    try:
        ladder = load_rod_ladder(args.ladder)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    n_phases = args.phases or config.run.phases
    phases = scenarios.default_phases(n_phases)
    rows = scenarios.run_gvd_sweep(config, ladder, phases, jobs=args.jobs)
    table = [[getattr(r, f) for f in scenarios.GvdSweepRow.__dataclass_fields__] for r in rows]
    manifest.add(outputs.write_table_csv(out / "sweep_gvd.csv", SWEEP_COLUMNS, table, config, phases=n_phases))
    if any(not r.error for r in rows):
        manifest.add(plotting.plot_gvd_sweep(out / "sweep_gvd.svg", rows, show_band=n_phases > 1))
    manifest.add(outputs.write_metadata(out / "sweep_gvd_metadata.json", config, phases=n_phases,
                                        ladder=str(args.ladder)))
    manifest.write()
    for r in rows:
        status = f"ERROR {r.error}" if r.error else (
            f"FWHM {r.fwhm_constructive:.4f} THz  g2 {r.g2_constructive:.4f}  "
            f"<FWHM> {r.fwhm_mean:.4f}+-{r.fwhm_std:.4f}")
        print(f"{r.k_double_prime_d:.5f} ps^2  {r.name}: {status}")
    failed = [r for r in rows if r.error]
    if failed:
        print(f"error: {len(failed)} of {len(rows)} rows failed", file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_OK


DELAY_COLUMNS = ("delta_L_p_mm", "n_peaks", "peak_frequencies_THz", "peak_heights", "fwhm_per_peak_THz")


def cmd_delay_scan(args) -> int:
    config, out, manifest = _prepare(args, "delay-scan")
    rows = scenarios.run_delay_scan(config, args.delays, jobs=args.jobs)
    table = []
    for row in rows:
        table.append([row.delta_L_p, len(row.peak_frequencies), list(row.peak_frequencies),
                      list(row.peak_heights), list(row.fwhm_per_peak)])
        tag = f"{row.delta_L_p:.3f}mm".replace("-", "m")
        manifest.add(outputs.write_spectrum_csv(out / f"delay_{tag}.csv", row.spectrum, config,
                                                delta_L_p_mm=row.delta_L_p))
        manifest.add(outputs.write_spectrum_csv(out / f"delay_{tag}_convolved.csv", row.convolved, config,
                                                delta_L_p_mm=row.delta_L_p))
        peaks = ", ".join(f"{f:.3f}" for f in row.peak_frequencies)
        print(f"{row.delta_L_p:.3f} mm: peaks at [{peaks}] THz")
    manifest.add(outputs.write_table_csv(out / "delay_scan.csv", DELAY_COLUMNS, table, config))
    manifest.add(plotting.plot_delay_waterfall(out / "delay_scan.svg", rows))
    manifest.add(outputs.write_metadata(out / "delay_scan_metadata.json", config, delays_mm=list(args.delays)))
    manifest.write()
    return EXIT_OK


GAIN_COLUMNS = ("gain", "K", "g2", "fwhm_THz", "phase_constructive_rad", "coupling")


def cmd_gain_study(args) -> int:
    config, out, manifest = _prepare(args, "gain-study")
    if not args.gains or any(not g > 0 for g in args.gains):
        raise UsageError(f"--gains must be positive numbers, got {args.gains}")
    rows = scenarios.run_gain_study(config, args.gains, jobs=args.jobs)
    table = [[r.gain, r.K, r.g2, r.fwhm_thz, r.phase_constructive, r.coupling] for r in rows]
    manifest.add(outputs.write_table_csv(out / "gain_study.csv", GAIN_COLUMNS, table, config))
    manifest.add(plotting.plot_gain_study(out / "gain_study.svg", rows))
    manifest.add(outputs.write_metadata(out / "gain_study_metadata.json", config, gains=list(args.gains)))
    manifest.write()
    for r in rows:
        print(f"G {r.gain:g}: K {r.K:.4f}  g2 {r.g2:.4f}  FWHM {r.fwhm_thz:.4f} THz")
    return EXIT_OK


def cmd_dump_jsa(args) -> int:
    config, out, manifest = _prepare(args, "dump-jsa")
    path = out / "jsa.npz"
    save_jsa(path, build_jsa(config))
    manifest.add(path)
    manifest.add(outputs.write_metadata(out / "dump_jsa_metadata.json", config))
    manifest.write()
    return EXIT_OK


def cmd_dump_modes(args) -> int:
    config, out, manifest = _prepare(args, "dump-modes")
    dec = scenarios.decompose(config)
    hg = modes.reweight_high_gain(dec.weights, modes.coupling_for_gain(dec, config.gain, config.run.gain_convention))
    for path in modes.save_modes(out / "modes", dec, hg, args.n_modes):
        manifest.add(path)
    manifest.add(outputs.write_metadata(out / "dump_modes_metadata.json", config,
                                        truncation_rank=dec.truncation_rank, discarded_mass=dec.discarded_mass))
    manifest.write()
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "sweep-gvd": cmd_sweep_gvd,
    "delay-scan": cmd_delay_scan,
    "gain-study": cmd_gain_study,
    "dump-jsa": cmd_dump_jsa,
    "dump-modes": cmd_dump_modes,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, dispersion.MaterialError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, ValueError, scenarios.ScenarioError, dispersion.MaterialRangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
