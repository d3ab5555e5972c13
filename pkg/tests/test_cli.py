import csv
import json

import pytest

from su11spec import cli, scenarios
from su11spec.config import load_config

SMALL = ["--n-points", "64", "--half-span-thz", "6"]


def run(tmp_path, *argv):
    return cli.main([*argv, "--out", str(tmp_path), *SMALL])


def read_table(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def test_spectrum_writes_csv_and_svg(tmp_path, capsys):
    assert run(tmp_path, "spectrum", "--convolve") == 0
    for name in ("spectrum_single_crystal.csv", "spectrum_interferometer.csv",
                 "spectrum_interferometer_convolved.csv", "spectrum.svg", "spectrum_metadata.json"):
        assert (tmp_path / name).is_file(), name
    head = (tmp_path / "spectrum_interferometer.csv").read_text().splitlines()
    assert head[0].startswith("# config_hash=")
    assert head[1] == "frequency_THz,wavelength_nm,photon_number_density"
    assert len(head) == 2 + 64
    assert "FWHM" in capsys.readouterr().out


def test_single_crystal_only(tmp_path):
    assert run(tmp_path, "spectrum", "--single-crystal") == 0
    assert (tmp_path / "spectrum_single_crystal.csv").is_file()
    assert not (tmp_path / "spectrum_interferometer.csv").exists()
    meta = json.loads((tmp_path / "spectrum_metadata.json").read_text())
    assert list(meta["results"]) == ["single_crystal"]


def test_missing_config_is_usage_error(tmp_path, capsys):
    assert cli.main(["spectrum", "--config", "no_such_config", "--out", str(tmp_path)]) == 2
    assert "config not found" in capsys.readouterr().err


def test_bad_override_is_usage_error(tmp_path):
    assert run(tmp_path, "spectrum", "--gain", "-1") == 2


def test_single_phase_sweep_has_no_band(tmp_path):
    one = tmp_path / "one"
    many = tmp_path / "many"
    args = ["sweep-gvd", "--ladder", "rod_ladder", *SMALL]
    assert cli.main([*args, "--phases", "1", "--out", str(one)]) == 0
    assert cli.main([*args, "--phases", "2", "--out", str(many)]) == 0
    pink = "#e377c2"  # tab:pink
    assert pink not in (one / "sweep_gvd.svg").read_text()
    assert pink in (many / "sweep_gvd.svg").read_text()
    rows = read_table(one / "sweep_gvd.csv")
    assert all(float(r["fwhm_std_THz"]) == 0.0 for r in rows)


def test_gain_study_table_matches_library(tmp_path):
    assert run(tmp_path, "gain-study", "--gains", "7,10") == 0
    rows = read_table(tmp_path / "gain_study.csv")
    assert [float(r["gain"]) for r in rows] == [7.0, 10.0]
    cfg = load_config("baseline").evolve(run__n_points=64, run__half_span_thz=6.0)
    lib = scenarios.run_gain_study(cfg, [7.0, 10.0])
    for r, ref in zip(rows, lib):
        assert float(r["K"]) == pytest.approx(ref.K, rel=1e-9)
        assert float(r["g2"]) == pytest.approx(ref.g2, rel=1e-9)


def test_gain_study_rejects_nonpositive(tmp_path):
    assert run(tmp_path, "gain-study", "--gains", "0,7") == 2


def test_every_file_in_exactly_one_manifest(tmp_path):
    for cmd in (["spectrum"], ["delay-scan", "--delays", "0,0.5"], ["gain-study", "--gains", "7"],
                ["dump-jsa"], ["dump-modes", "--n-modes", "3"]):
        assert run(tmp_path, *cmd) == 0
    manifests = sorted(tmp_path.glob("*_manifest.json"))
    assert len(manifests) == 5
    listed = []
    for m in manifests:
        data = json.loads(m.read_text())
        assert data["config_hash"] and data["timestamp"] and data["material_versions"]
        listed += data["files"]
    assert len(listed) == len(set(listed))
    on_disk = {p.relative_to(tmp_path).as_posix() for p in tmp_path.rglob("*") if p.is_file()}
    assert on_disk - {m.name for m in manifests} == set(listed)


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["delay-scan", "--delays", "0,0.5", "--out", str(out), *SMALL]) == 0
    for f in a.iterdir():
        if f.suffix in (".csv", ".svg") or f.name.endswith("metadata.json"):
            assert f.read_bytes() == (b / f.name).read_bytes(), f.name
