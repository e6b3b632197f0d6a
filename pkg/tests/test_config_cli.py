"""Configuration parsing and the command-line surface."""

import numpy as np
import pytest

from darkring.cli import main, preset_path
from darkring.config import ConfigError, load_config, parse_config
from darkring.formats import read_csv

MINI_BEAM = """
[beam]
w0 = 1.7mm
power = 150mW
detuning = 1.0nm
ell = 1
rc_over_w0 = 0.79

[optics]
grid_n = 256
pad_factor = 4
crop = 256

[output]
directory = {out}
formats = csv,pgm,raw,png
"""


def test_suffix_parsing():
    cfg = parse_config(
        "[beam]\nw0 = 1.7mm\npower= 150mW\ndetuning = 0.5nm\n"
        "[schedule]\ndt = 10us\nduration = 1500ms\n"
        "[atoms]\ntemperature = 5uK\nsigma=250um\n")
    assert cfg.get("beam", "w0") == pytest.approx(1.7e-3)
    assert cfg.get("beam", "power") == pytest.approx(0.150)
    assert cfg.get("beam", "detuning") == pytest.approx(0.5e-9)
    assert cfg.get("schedule", "dt") == pytest.approx(10e-6)
    assert cfg.get("schedule", "duration") == pytest.approx(1.5)
    assert cfg.get("atoms", "temperature") == pytest.approx(5e-6)
    assert cfg.get("atoms", "sigma") == pytest.approx(250e-6)


def test_unknown_key_is_line_anchored():
    with pytest.raises(ConfigError) as err:
        parse_config("[beam]\nw0 = 1.7mm\nbogus_key = 3\n", source="test.ini")
    assert "test.ini:3" in str(err.value)
    assert "bogus_key" in str(err.value)


def test_unknown_section_and_bad_values():
    with pytest.raises(ConfigError) as err:
        parse_config("[nonsense]\nx = 1\n")
    assert "nonsense" in str(err.value)
    with pytest.raises(ConfigError):
        parse_config("[beam]\nw0 = fast\n")
    with pytest.raises(ConfigError):
        parse_config("w0 = 1.7mm\n")          # key before any section
    with pytest.raises(ConfigError):
        parse_config("[atoms]\nn = 3.5\n")    # integer expected


def test_required_keys():
    cfg = parse_config("[beam]\npower = 150mW\n", source="x.ini")
    with pytest.raises(ConfigError) as err:
        cfg.require("beam.w0", "beam.power")
    assert "beam.w0" in str(err.value)


def test_manifest_lists_all_sections():
    cfg = parse_config("[beam]\nw0 = 1.2mm\n")
    text = cfg.manifest()
    assert "[beam]" in text and "[schedule]" in text
    assert "w0 = 0.0012" in text


def test_preset_files_parse():
    for name in ("fig1c_l0", "fig1c_l1", "fig1c_l2", "fig3_delta0.5nm",
                 "fig3_delta1nm", "fig3_delta2nm", "fig3_delta4nm",
                 "fig4_displace0mm", "fig4_displace1.5mm",
                 "fig4_displace3mm"):
        cfg = load_config(preset_path(name))
        assert cfg.get("beam", "w0") == pytest.approx(1.7e-3)


def test_cli_unknown_preset_exits_2(capsys):
    rc = main(["scan", "--preset", "no_such_thing"])
    assert rc == 2
    assert "unknown preset" in capsys.readouterr().err


def test_cli_missing_required_key_exit_2(tmp_path, capsys):
    cfg = tmp_path / "broken.ini"
    cfg.write_text("[beam]\npower = 150mW\nell = 1\nrc_over_w0 = 0.79\n"
                   f"[output]\ndirectory = {tmp_path/'out'}\n")
    rc = main(["beam", "--config", str(cfg)])
    assert rc == 2
    assert "beam.w0" in capsys.readouterr().err


def test_cli_beam_writes_outputs(tmp_path):
    cfg = tmp_path / "beam.ini"
    cfg.write_text(MINI_BEAM.format(out=tmp_path / "out"))
    rc = main(["beam", "--config", str(cfg), "--manifest"])
    assert rc == 0
    out = tmp_path / "out"
    for name in ("mask_phase.pgm", "focal_intensity.pgm", "mask_phase.drf",
                 "focal_field.drf", "beam.png", "manifest.ini"):
        assert (out / name).exists(), name


def test_cli_beam_decompose_spectrum(tmp_path):
    cfg = tmp_path / "beam.ini"
    text = MINI_BEAM.format(out=tmp_path / "out") + "\n"
    text = text.replace("[optics]", "[optics]\n")
    text += "\n"
    cfg.write_text(text.replace("rc_over_w0 = 0.79",
                                "rc_over_w0 = 0.71\ndecompose = 1\np_max = 3")
                   .replace("ell = 1", "ell = 0"))
    rc = main(["beam", "--config", str(cfg)])
    assert rc == 0
    hdr, rows = read_csv(tmp_path / "out" / "mode_spectrum.csv")
    assert hdr == ["p", "fraction"]
    assert (tmp_path / "out" / "mode_spectrum_waist_scan.csv").exists()
    assert (tmp_path / "out" / "mode_spectrum_best.txt").exists()


def test_cli_scan_topology_error_exit_3(tmp_path, capsys):
    cfg = tmp_path / "scan.ini"
    cfg.write_text(
        "[beam]\nw0 = 1.7mm\npower = 150mW\ndetuning = 1.0nm\nell = 1\n"
        "rc_over_w0 = 0.30\n[optics]\nfast = 1\n"
        f"[output]\ndirectory = {tmp_path/'out'}\n")
    rc = main(["scan", "--config", str(cfg)])
    assert rc == 3


def test_cli_fit_roundtrip(tmp_path):
    # synthesize a curve CSV, fit it through the CLI
    from darkring.formats import write_csv
    t = np.linspace(0.01, 1.2, 80)
    y = 0.58 * (1 - np.exp(-t / (0.04 + 0.12 * np.sqrt(t))))
    write_csv(tmp_path / "curve.csv", ["time_s", "f3_fraction"],
              [[ti, yi] for ti, yi in zip(t, y)])
    cfg = tmp_path / "fit.ini"
    cfg.write_text(f"[beam]\ndetuning = 0.5nm\n[output]\n"
                   f"directory = {tmp_path/'out'}\n")
    rc = main(["fit", "--config", str(cfg), "--input",
               str(tmp_path / "curve.csv")])
    assert rc == 0
    assert (tmp_path / "out" / "fit.txt").exists()
    assert (tmp_path / "out" / "lifetimes.csv").exists()
    assert (tmp_path / "out" / "fit.png").exists()
    text = (tmp_path / "out" / "fit.txt").read_text()
    assert "preferred = chirped" in text


def test_cli_fit_malformed_csv_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("wrong,columns\r\n1,2\r\n")
    cfg = tmp_path / "fit.ini"
    cfg.write_text(f"[output]\ndirectory = {tmp_path/'out'}\n")
    rc = main(["fit", "--config", str(cfg), "--input", str(bad)])
    assert rc == 2


def test_cli_mc_deterministic_csv(tmp_path):
    base = (
        "[beam]\nw0 = 1.7mm\npower = 150mW\ndetuning = 1.0nm\nell = 1\n"
        "rc_over_w0 = 0.79\n"
        "[optics]\nfast = 1\nz_span = 12mm\nn_planes = 49\n"
        "[atoms]\nn = 120\nseed = 9\n"
        "[schedule]\nduration = 80ms\nrecord_interval = 10ms\n"
    )
    outs = []
    for run in ("a", "b"):
        cfg = tmp_path / f"mc_{run}.ini"
        cfg.write_text(base + f"[output]\ndirectory = {tmp_path/('out_'+run)}\n"
                       + "formats = csv\n")
        rc = main(["mc", "--config", str(cfg)])
        assert rc == 0
        outs.append((tmp_path / ("out_" + run) / "trajectory.csv").read_bytes())
    assert outs[0] == outs[1]
